#include "sabc/regression.hpp"

#include "sabc/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace sabc {

namespace {

constexpr double kRankConditionLimit = 1e12;
constexpr double kVifLimit = 1e12;

void append_exponents(std::size_t coord, int remaining, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
    if (coord + 1 == current.size()) {
        current[coord] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[coord] = e;
        append_exponents(coord + 1, remaining - e, current, out);
    }
    current[coord] = 0;
}

double monomial_value(const Vector& s, const std::vector<int>& exponent) {
    double v = 1.0;
    for (std::size_t j = 0; j < exponent.size(); ++j) {
        for (int k = 0; k < exponent[j]; ++k) v *= s(static_cast<Eigen::Index>(j));
    }
    return v;
}

double cap(double v) {
    if (!std::isfinite(v) || v > kInfiniteSentinel) return kInfiniteSentinel;
    return v;
}

double condition_from_singular_values(const Vector& sv) {
    if (sv.size() == 0) return 1.0;
    const double hi = sv.maxCoeff();
    const double lo = sv.minCoeff();
    if (hi == 0.0 || lo <= 0.0) return kInfiniteSentinel;
    return cap(hi / lo);
}

Vector singular_values(const Matrix& a) {
    if (a.size() == 0) return Vector();
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues();
}

struct Prepared {
    Matrix x;             ///< centered, row-weighted design
    Matrix y;             ///< centered, row-weighted responses
    Vector x_mean;
    Vector y_mean;
    Vector norm_weights;  ///< weights summing to 1
};

Prepared prepare(const Matrix& design, const Matrix& responses, std::span<const double> weights,
                 bool center) {
    const auto m = design.rows();
    Prepared p;
    p.norm_weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
    Vector row_scale = Vector::Ones(m);

    if (!weights.empty()) {
        if (static_cast<Eigen::Index>(weights.size()) != m) {
            throw ValidationError("fit_linear: weight count does not match rows");
        }
        const double total = exact_sum(weights);
        if (!(total > 0.0)) throw ValidationError("fit_linear: weights must have positive sum");
        for (Eigen::Index i = 0; i < m; ++i) {
            const double w = weights[static_cast<std::size_t>(i)];
            if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("fit_linear: weights must be nonnegative");
            p.norm_weights(i) = w / total;
            row_scale(i) = std::sqrt(p.norm_weights(i) * static_cast<double>(m));
        }
    }

    auto weighted_mean = [&](const Matrix& a) {
        if (weights.empty()) return sample_mean(a);
        Vector mean(a.cols());
        std::vector<double> terms(static_cast<std::size_t>(m));
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            for (Eigen::Index i = 0; i < m; ++i) terms[static_cast<std::size_t>(i)] = p.norm_weights(i) * a(i, j);
            mean(j) = exact_sum(terms);
        }
        return mean;
    };

    if (center) {
        p.x_mean = weighted_mean(design);
        p.y_mean = weighted_mean(responses);
    } else {
        p.x_mean = Vector::Zero(design.cols());
        p.y_mean = Vector::Zero(responses.cols());
    }
    p.x = (design.rowwise() - p.x_mean.transpose()).array().colwise() * row_scale.array();
    p.y = (responses.rowwise() - p.y_mean.transpose()).array().colwise() * row_scale.array();
    return p;
}

struct DesignShape {
    double condition = 1.0;         ///< unscaled
    double scaled_condition = 1.0;  ///< column-scaled
    Vector vifs;
};

/// Conditioning of a centered (already weighted) design.
DesignShape analyse_design(const Matrix& x) {
    const auto q = x.cols();
    DesignShape shape;
    if (q == 0) return shape;

    Matrix r;
    if (x.rows() >= q) {
        Eigen::HouseholderQR<Matrix> qr(x);
        r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    } else {
        r = x;
    }
    shape.condition = condition_from_singular_values(singular_values(r));

    const Vector norms = x.colwise().norm();
    std::vector<bool> degenerate(static_cast<std::size_t>(q), false);
    bool any_degenerate = false;
    Vector inv_norms(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        degenerate[static_cast<std::size_t>(j)] = !(norms(j) > 0.0);
        any_degenerate = any_degenerate || degenerate[static_cast<std::size_t>(j)];
        inv_norms(j) = degenerate[static_cast<std::size_t>(j)] ? 0.0 : 1.0 / norms(j);
    }
    const Matrix scaled_r = r * inv_norms.asDiagonal();
    shape.scaled_condition = any_degenerate ? kInfiniteSentinel
                                            : condition_from_singular_values(singular_values(scaled_r));

    Matrix corr = scaled_r.transpose() * scaled_r;
    for (Eigen::Index j = 0; j < q; ++j) {
        if (!degenerate[static_cast<std::size_t>(j)]) corr(j, j) = 1.0;
    }
    shape.vifs = vifs_from_correlation(corr, degenerate);
    return shape;
}

}  // namespace

BasisSpec BasisSpec::identity() { return BasisSpec{}; }

BasisSpec BasisSpec::polynomial(int degree) {
    BasisSpec spec;
    spec.kind = Kind::polynomial;
    spec.degree = degree;
    spec.validate();
    return spec;
}

BasisSpec BasisSpec::powers(std::vector<std::vector<int>> exponents) {
    BasisSpec spec;
    spec.kind = Kind::powers;
    spec.exponents = std::move(exponents);
    spec.validate();
    return spec;
}

BasisSpec BasisSpec::custom(std::string name, std::size_t output_dim, std::function<Vector(const Vector&)> map) {
    BasisSpec spec;
    spec.kind = Kind::custom;
    spec.custom_name = std::move(name);
    spec.custom_dim = output_dim;
    spec.custom_map = std::move(map);
    spec.validate();
    return spec;
}

void BasisSpec::validate() const {
    switch (kind) {
        case Kind::identity:
            break;
        case Kind::polynomial:
            if (degree < 1) throw ValidationError("basis: polynomial degree must be >= 1");
            break;
        case Kind::powers:
            if (exponents.empty()) throw ValidationError("basis: powers list is empty");
            for (const auto& e : exponents) {
                if (e.empty()) throw ValidationError("basis: empty exponent vector");
                for (int v : e) {
                    if (v < 0) throw ValidationError("basis: exponent vectors must be nonnegative");
                }
            }
            break;
        case Kind::custom:
            if (!custom_map || custom_dim == 0) throw ValidationError("basis: custom basis needs a map and dimension");
            break;
    }
}

std::vector<std::vector<int>> BasisSpec::monomials(std::size_t input_dim) const {
    std::vector<std::vector<int>> out;
    switch (kind) {
        case Kind::identity:
            for (std::size_t j = 0; j < input_dim; ++j) {
                std::vector<int> e(input_dim, 0);
                e[j] = 1;
                out.push_back(std::move(e));
            }
            break;
        case Kind::polynomial: {
            if (input_dim == 0) break;
            std::vector<int> current(input_dim, 0);
            for (int total = 1; total <= degree; ++total) append_exponents(0, total, current, out);
            break;
        }
        case Kind::powers:
            for (const auto& e : exponents) {
                if (e.size() != input_dim) {
                    throw ValidationError("basis: exponent vector has length " + std::to_string(e.size()) +
                                          ", statistics have " + std::to_string(input_dim));
                }
            }
            out = exponents;
            break;
        case Kind::custom:
            break;
    }
    return out;
}

std::size_t BasisSpec::output_dim(std::size_t input_dim) const {
    if (kind == Kind::custom) return custom_dim;
    return monomials(input_dim).size();
}

std::string BasisSpec::kind_name() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::polynomial: return "polynomial";
        case Kind::powers: return "powers";
        case Kind::custom: return "custom";
    }
    return "unknown";
}

std::string monomial_name(const std::vector<int>& exponent) {
    std::string name;
    for (std::size_t j = 0; j < exponent.size(); ++j) {
        if (exponent[j] == 0) continue;
        if (!name.empty()) name += "*";
        name += "s" + std::to_string(j + 1);
        if (exponent[j] > 1) name += "^" + std::to_string(exponent[j]);
    }
    return name.empty() ? "1" : name;
}

Vector expand_basis(const Vector& s, const BasisSpec& spec) {
    spec.validate();
    if (spec.kind == BasisSpec::Kind::identity) return s;
    if (spec.kind == BasisSpec::Kind::custom) {
        Vector out = spec.custom_map(s);
        if (static_cast<std::size_t>(out.size()) != spec.custom_dim) {
            throw ValidationError("basis '" + spec.custom_name + "' returned the wrong dimension");
        }
        if (!out.allFinite()) throw NumericalError("basis '" + spec.custom_name + "' produced a non-finite value");
        return out;
    }
    const auto terms = spec.monomials(static_cast<std::size_t>(s.size()));
    Vector out(static_cast<Eigen::Index>(terms.size()));
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const double v = monomial_value(s, terms[k]);
        if (!std::isfinite(v)) {
            throw NumericalError("basis expansion overflow in monomial " + monomial_name(terms[k]));
        }
        out(static_cast<Eigen::Index>(k)) = v;
    }
    return out;
}

Matrix expand_design(const Matrix& stats, const BasisSpec& spec) {
    spec.validate();
    if (spec.kind == BasisSpec::Kind::identity) return stats;
    const auto q = static_cast<Eigen::Index>(spec.output_dim(static_cast<std::size_t>(stats.cols())));
    Matrix out(stats.rows(), q);
    for (Eigen::Index m = 0; m < stats.rows(); ++m) {
        out.row(m) = expand_basis(stats.row(m).transpose(), spec).transpose();
    }
    return out;
}

Vector vifs_from_correlation(const Matrix& correlation, const std::vector<bool>& degenerate) {
    const auto q = correlation.rows();
    Vector vifs = Vector::Ones(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        if (degenerate[static_cast<std::size_t>(j)]) {
            vifs(j) = kInfiniteSentinel;
            continue;
        }
        std::vector<Eigen::Index> others;
        for (Eigen::Index k = 0; k < q; ++k) {
            if (k != j && !degenerate[static_cast<std::size_t>(k)]) others.push_back(k);
        }
        if (others.empty()) continue;
        const auto n = static_cast<Eigen::Index>(others.size());
        Matrix sub(n, n);
        Matrix c(n, 1);
        for (Eigen::Index a = 0; a < n; ++a) {
            c(a, 0) = correlation(others[static_cast<std::size_t>(a)], j);
            for (Eigen::Index b = 0; b < n; ++b) {
                sub(a, b) = correlation(others[static_cast<std::size_t>(a)], others[static_cast<std::size_t>(b)]);
            }
        }
        double unexplained = 0.0;  // 1 − R²ⱼ
        try {
            const Matrix x = solve_spd(sub, c);
            unexplained = 1.0 - (c.transpose() * x)(0, 0);
        } catch (const NumericalError&) {
            unexplained = 0.0;
        }
        vifs(j) = unexplained <= 1.0 / kVifLimit ? kInfiniteSentinel : 1.0 / unexplained;
    }
    return vifs;
}

LinearFit fit_linear(const Matrix& design, const Matrix& responses, double ridge_lambda,
                     std::span<const double> weights, bool include_intercept) {
    if (design.rows() != responses.rows()) throw ValidationError("fit_linear: design and responses differ in rows");
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
        throw ValidationError("fit_linear: ridge_lambda must be finite and >= 0");
    }
    if (!design.allFinite() || !responses.allFinite()) throw ValidationError("fit_linear: non-finite input");
    const auto m = static_cast<std::size_t>(design.rows());
    const auto q = static_cast<std::size_t>(design.cols());
    if (ridge_lambda == 0.0 && m < q + 2) {
        throw ValidationError("fit_linear: " + std::to_string(m) + " rows is too few for " + std::to_string(q) +
                              " design columns (need q+2)");
    }
    if (m < 2) throw ValidationError("fit_linear: need at least 2 rows");

    const Prepared prep = prepare(design, responses, weights, include_intercept);
    const DesignShape shape = analyse_design(prep.x);

    if (ridge_lambda == 0.0 && shape.scaled_condition > kRankConditionLimit) {
        throw NumericalError("rank deficient; supply ridge_lambda (condition number " +
                                 std::to_string(shape.condition) + ", column-scaled " +
                                 std::to_string(shape.scaled_condition) + ")",
                             shape.condition);
    }

    Matrix beta;  // q×p
    if (ridge_lambda == 0.0) {
        beta = prep.x.householderQr().solve(prep.y);
    } else {
        const auto qi = static_cast<Eigen::Index>(q);
        Matrix x_aug(prep.x.rows() + qi, qi);
        x_aug << prep.x, std::sqrt(ridge_lambda) * Matrix::Identity(qi, qi);
        Matrix y_aug(prep.y.rows() + qi, prep.y.cols());
        y_aug << prep.y, Matrix::Zero(qi, prep.y.cols());
        beta = x_aug.householderQr().solve(y_aug);
    }

    LinearFit fit;
    fit.coefficients = beta.transpose();
    fit.intercept = prep.y_mean - fit.coefficients * prep.x_mean;
    fit.condition_number = shape.condition;
    fit.vifs = shape.vifs;
    fit.ridge_lambda = ridge_lambda;

    const Matrix residuals = (responses.rowwise() - fit.intercept.transpose()) - design * beta;
    fit.residual_mss.resize(responses.cols());
    std::vector<double> terms(m);
    for (Eigen::Index j = 0; j < responses.cols(); ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            terms[i] = prep.norm_weights(ii) * residuals(ii, j) * residuals(ii, j);
        }
        fit.residual_mss(j) = exact_sum(terms);
    }
    return fit;
}

ConditionDiagnostics condition_diagnostics(const Matrix& design) {
    if (design.rows() < 2) throw ValidationError("condition_diagnostics: need at least 2 rows");
    const Matrix centered = design.rowwise() - sample_mean(design).transpose();
    const DesignShape shape = analyse_design(centered);
    return {shape.scaled_condition, shape.vifs};
}

}  // namespace sabc
