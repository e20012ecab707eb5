#include "sabc/abc_engine.hpp"

#include "sabc/diagnostics.hpp"
#include "sabc/error.hpp"
#include "sabc/parallel.hpp"
#include "sabc/regression.hpp"
#include "sabc/util.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sabc {

namespace {

constexpr std::size_t kTruncationProbe = 10000;
constexpr double kMinTruncationRate = 1e-4;
constexpr std::size_t kMaxRejectionTries = 10'000'000;

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace

// --- TruncationRegion / WeightedPosterior ---------------------------------

bool TruncationRegion::contains(const Vector& theta) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const double v = theta(static_cast<Eigen::Index>(i));
        if (v < lo[i] || v > hi[i]) return false;
    }
    return true;
}

void TruncationRegion::validate() const {
    if (lo.size() != hi.size()) throw ValidationError("truncation region: lo/hi length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i]) {
            throw ValidationError("truncation region: invalid interval for coordinate " + std::to_string(i));
        }
    }
}

bool WeightedPosterior::has_uniform_weights() const {
    if (weights.size() == 0) return true;
    const double w0 = weights(0);
    for (Eigen::Index i = 1; i < weights.size(); ++i) {
        if (std::abs(weights(i) - w0) > 1e-12 * w0) return false;
    }
    return true;
}

void WeightedPosterior::validate() const {
    if (thetas.rows() < 1) throw ValidationError("posterior: no draws");
    if (weights.size() != thetas.rows()) throw ValidationError("posterior: weight count does not match draws");
    if (!thetas.allFinite()) throw ValidationError("posterior: non-finite draws");
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights(i) >= 0.0)) throw ValidationError("posterior: negative weight");
    }
    const double total = exact_sum({weights.data(), static_cast<std::size_t>(weights.size())});
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("posterior: weights sum to " + format_double(total) + ", expected 1");
    }
}

Vector WeightedPosterior::mean() const {
    Vector out(thetas.cols());
    std::vector<double> terms(static_cast<std::size_t>(thetas.rows()));
    for (Eigen::Index j = 0; j < thetas.cols(); ++j) {
        for (Eigen::Index i = 0; i < thetas.rows(); ++i) terms[static_cast<std::size_t>(i)] = weights(i) * thetas(i, j);
        out(j) = exact_sum(terms);
    }
    return out;
}

// --- priors ----------------------------------------------------------------

CoordinatePrior CoordinatePrior::uniform(double lo, double hi) {
    CoordinatePrior c{Kind::uniform, lo, hi, {}, {}};
    c.validate();
    return c;
}

CoordinatePrior CoordinatePrior::normal(double mean, double sd) {
    CoordinatePrior c{Kind::normal, mean, sd, {}, {}};
    c.validate();
    return c;
}

CoordinatePrior CoordinatePrior::lognormal(double mu, double sigma) {
    CoordinatePrior c{Kind::lognormal, mu, sigma, {}, {}};
    c.validate();
    return c;
}

CoordinatePrior CoordinatePrior::discrete(std::vector<double> values, std::vector<double> probs) {
    CoordinatePrior c{Kind::discrete, 0.0, 0.0, std::move(values), std::move(probs)};
    c.validate();
    return c;
}

void CoordinatePrior::validate() const {
    switch (kind) {
        case Kind::uniform:
            if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ValidationError("uniform prior needs lo < hi");
            break;
        case Kind::normal:
        case Kind::lognormal:
            if (!(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
                throw ValidationError("normal/log-normal prior needs a positive scale");
            }
            break;
        case Kind::discrete: {
            if (values.empty() || values.size() != probs.size()) {
                throw ValidationError("discrete prior needs matching nonempty values and probs");
            }
            double total = 0.0;
            for (double p : probs) {
                if (!(p >= 0.0)) throw ValidationError("discrete prior probabilities must be nonnegative");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) throw ValidationError("discrete prior probabilities must sum to 1");
            break;
        }
    }
}

double CoordinatePrior::draw(DrawStream& rng) const {
    switch (kind) {
        case Kind::uniform: return rng.uniform(a, b);
        case Kind::normal: return rng.normal(a, b);
        case Kind::lognormal: return std::exp(rng.normal(a, b));
        case Kind::discrete: {
            const double u = rng.uniform();
            double cumulative = 0.0;
            for (std::size_t k = 0; k + 1 < values.size(); ++k) {
                cumulative += probs[k];
                if (u < cumulative) return values[k];
            }
            return values.back();
        }
    }
    return 0.0;
}

double CoordinatePrior::quantile(double p) const {
    switch (kind) {
        case Kind::uniform: return a + p * (b - a);
        case Kind::normal: return boost::math::quantile(boost::math::normal(a, b), p);
        case Kind::lognormal: return std::exp(boost::math::quantile(boost::math::normal(a, b), p));
        case Kind::discrete: {
            double cumulative = 0.0;
            std::vector<std::size_t> order(values.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x] < values[y]; });
            for (auto k : order) {
                cumulative += probs[k];
                if (cumulative >= p) return values[k];
            }
            return values[order.back()];
        }
    }
    return 0.0;
}

double CoordinatePrior::mean() const {
    switch (kind) {
        case Kind::uniform: return 0.5 * (a + b);
        case Kind::normal: return a;
        case Kind::lognormal: return std::exp(a + 0.5 * b * b);
        case Kind::discrete: {
            double m = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) m += values[k] * probs[k];
            return m;
        }
    }
    return 0.0;
}

double CoordinatePrior::log_density(double x) const {
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;
    switch (kind) {
        case Kind::uniform:
            return (x >= a && x <= b) ? -std::log(b - a) : -INFINITY;
        case Kind::normal: {
            const double z = (x - a) / b;
            return -0.5 * z * z - std::log(b) - kLogSqrt2Pi;
        }
        case Kind::lognormal: {
            if (!(x > 0.0)) return -INFINITY;
            const double z = (std::log(x) - a) / b;
            return -0.5 * z * z - std::log(b) - kLogSqrt2Pi - std::log(x);
        }
        case Kind::discrete:
            throw ValidationError("log_density: discrete prior has no density");
    }
    return -INFINITY;
}

std::string CoordinatePrior::describe() const {
    switch (kind) {
        case Kind::uniform: return "uniform(" + format_double(a) + "," + format_double(b) + ")";
        case Kind::normal: return "normal(" + format_double(a) + "," + format_double(b) + ")";
        case Kind::lognormal: return "lognormal(" + format_double(a) + "," + format_double(b) + ")";
        case Kind::discrete: {
            std::string s = "discrete(";
            for (std::size_t k = 0; k < values.size(); ++k) {
                if (k) s += ";";
                s += format_double(values[k]) + ":" + format_double(probs[k]);
            }
            return s + ")";
        }
    }
    return "?";
}

JointNormalPrior JointNormalPrior::make(Vector mean, Matrix cov) {
    JointNormalPrior prior{std::move(mean), std::move(cov), Matrix()};
    if (prior.cov.rows() != prior.mean.size() || prior.cov.cols() != prior.mean.size()) {
        throw ValidationError("joint normal prior: covariance has wrong shape");
    }
    Eigen::LLT<Matrix> llt(prior.cov);
    if (llt.info() != Eigen::Success) throw ValidationError("joint normal prior: covariance is not positive definite");
    prior.lower = llt.matrixL();
    return prior;
}

std::size_t PriorSpec::dim() const {
    return joint_normal ? static_cast<std::size_t>(joint_normal->mean.size()) : coordinates.size();
}

void PriorSpec::validate() const {
    if (joint_normal) {
        if (!coordinates.empty()) throw ValidationError("prior: give either coordinates or a joint normal, not both");
        const auto p = joint_normal->mean.size();
        if (p == 0 || joint_normal->cov.rows() != p || joint_normal->cov.cols() != p) {
            throw ValidationError("prior: joint normal covariance has wrong shape");
        }
        Eigen::LLT<Matrix> llt(joint_normal->cov);
        if (llt.info() != Eigen::Success) throw ValidationError("prior: joint normal covariance is not positive definite");
    } else {
        if (coordinates.empty()) throw ValidationError("prior: no coordinates");
        for (const auto& c : coordinates) c.validate();
    }
    if (truncation) {
        truncation->validate();
        if (truncation->dim() != dim()) throw ValidationError("prior: truncation box has wrong dimension");
        for (std::size_t i = 0; i < truncation->dim(); ++i) {
            if (!(truncation->hi[i] > truncation->lo[i])) {
                throw ValidationError("prior: truncation box must have positive volume (coordinate " +
                                      std::to_string(i) + ")");
            }
        }
    }
}

Vector PriorSpec::draw_untruncated(DrawStream& rng) const {
    if (joint_normal) {
        const auto p = joint_normal->mean.size();
        Vector z(p);
        for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
        if (joint_normal->lower.size() == 0) {
            const Matrix l = Eigen::LLT<Matrix>(joint_normal->cov).matrixL();
            return joint_normal->mean + l * z;
        }
        return joint_normal->mean + joint_normal->lower * z;
    }
    Vector theta(static_cast<Eigen::Index>(coordinates.size()));
    for (std::size_t i = 0; i < coordinates.size(); ++i) theta(static_cast<Eigen::Index>(i)) = coordinates[i].draw(rng);
    return theta;
}

Vector PriorSpec::mean() const {
    if (joint_normal) return joint_normal->mean;
    Vector m(static_cast<Eigen::Index>(coordinates.size()));
    for (std::size_t i = 0; i < coordinates.size(); ++i) m(static_cast<Eigen::Index>(i)) = coordinates[i].mean();
    return m;
}

std::string PriorSpec::describe() const {
    std::string s;
    if (joint_normal) {
        s = "mvnormal(mean=[";
        for (Eigen::Index i = 0; i < joint_normal->mean.size(); ++i) {
            if (i) s += ",";
            s += format_double(joint_normal->mean(i));
        }
        s += "],cov=[";
        for (Eigen::Index i = 0; i < joint_normal->cov.size(); ++i) {
            if (i) s += ",";
            s += format_double(joint_normal->cov.data()[i]);
        }
        s += "])";
    } else {
        for (std::size_t i = 0; i < coordinates.size(); ++i) {
            if (i) s += "|";
            s += coordinates[i].describe();
        }
    }
    if (truncation) {
        s += " truncated[";
        for (std::size_t i = 0; i < truncation->dim(); ++i) {
            if (i) s += ",";
            s += format_double(truncation->lo[i]) + ":" + format_double(truncation->hi[i]);
        }
        s += "]";
    }
    return s;
}

std::string PriorSpec::hash() const { return hex64(fnv1a64(describe())); }

PriorSpec PriorSpec::with_truncation(TruncationRegion region) const {
    PriorSpec out = *this;
    out.truncation = std::move(region);
    return out;
}

// --- simulation ------------------------------------------------------------

SimulationBatch simulate_batch(const PriorSpec& prior, const SimulatorContract& sim, std::size_t m,
                               std::uint64_t seed) {
    prior.validate();
    if (m < 1) throw ValidationError("simulate_batch: M must be >= 1");
    if (!sim.simulate) throw ValidationError("simulate_batch: simulator '" + sim.name + "' has no map");
    if (sim.param_dim != prior.dim()) {
        throw ValidationError("simulate_batch: simulator expects " + std::to_string(sim.param_dim) +
                              " parameters, prior has " + std::to_string(prior.dim()));
    }

    if (prior.truncation) {
        DrawStream probe(seed, 0, stream_domain::kTruncationProbe);
        std::size_t inside = 0;
        for (std::size_t i = 0; i < kTruncationProbe; ++i) {
            if (prior.truncation->contains(prior.draw_untruncated(probe))) ++inside;
        }
        const double rate = static_cast<double>(inside) / static_cast<double>(kTruncationProbe);
        if (rate < kMinTruncationRate) {
            throw ValidationError("truncation region too small for prior (acceptance rate " + format_double(rate) +
                                  " over " + std::to_string(kTruncationProbe) + " proposals)");
        }
    }

    SimulationBatch batch;
    batch.thetas.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(sim.param_dim));
    batch.stats.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(sim.stat_dim));
    batch.seed = seed;
    batch.model_name = sim.name;
    batch.prior_hash = prior.hash();

    parallel_for(m, [&](std::size_t i) {
        DrawStream rng(seed, i, stream_domain::kDraw);
        Vector theta = prior.draw_untruncated(rng);
        if (prior.truncation) {
            std::size_t tries = 1;
            while (!prior.truncation->contains(theta)) {
                if (++tries > kMaxRejectionTries) {
                    throw NumericalError("draw " + std::to_string(i) + ": truncated prior rejection did not terminate");
                }
                theta = prior.draw_untruncated(rng);
            }
        }
        const Vector s = sim.simulate(theta, rng);
        if (static_cast<std::size_t>(s.size()) != sim.stat_dim) {
            throw ValidationError("simulator '" + sim.name + "' returned " + std::to_string(s.size()) +
                                  " statistics, expected " + std::to_string(sim.stat_dim));
        }
        if (!s.allFinite() || !theta.allFinite()) {
            throw NumericalError("simulator '" + sim.name + "' produced non-finite output at draw " + std::to_string(i));
        }
        const auto row = static_cast<Eigen::Index>(i);
        batch.thetas.row(row) = theta.transpose();
        batch.stats.row(row) = s.transpose();
    });
    return batch;
}

// --- distances and scales --------------------------------------------------

double abc_distance(const Vector& s, const Vector& s_obs, const Vector& scales) {
    if (s.size() != s_obs.size() || s.size() != scales.size()) {
        throw ValidationError("abc_distance: dimension mismatch");
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        if (!(scales(j) > 0.0)) throw ValidationError("abc_distance: scales must be strictly positive");
        const double z = (s(j) - s_obs(j)) / scales(j);
        total += z * z;
    }
    return std::sqrt(total);
}

Vector compute_scales(const SimulationBatch& batch) { return compute_scales(batch.stats); }

Vector compute_scales(const Matrix& stats) {
    if (stats.rows() < 10) throw ValidationError("compute_scales: need at least 10 draws");
    const auto m = static_cast<std::size_t>(stats.rows());
    Vector scales(stats.cols());
    std::vector<double> column(m);
    for (Eigen::Index j = 0; j < stats.cols(); ++j) {
        for (std::size_t i = 0; i < m; ++i) column[i] = stats(static_cast<Eigen::Index>(i), j);
        const double med = median_of(column);
        std::vector<double> dev(m);
        for (std::size_t i = 0; i < m; ++i) dev[i] = std::abs(column[i] - med);
        double scale = 1.4826 * median_of(std::move(dev));
        if (!(scale > 0.0)) {
            scale = std::sqrt(sample_cov(stats.col(j), stats.col(j))(0, 0));
        }
        if (!(scale > 0.0)) {
            warn("statistic " + std::to_string(j + 1) + " is constant; using scale 1.0");
            scale = 1.0;
        }
        scales(j) = scale;
    }
    return scales;
}

// --- rejection -------------------------------------------------------------

WeightedPosterior rejection_abc(const SimulationBatch& batch, const Vector& s_obs, const Acceptance& accept,
                                const std::optional<Vector>& scales) {
    WeightedPosterior post = rejection_abc(batch.thetas, batch.stats, s_obs, accept, scales);
    post.provenance.seed = batch.seed;
    return post;
}

WeightedPosterior rejection_abc(const Matrix& thetas, const Matrix& stats, const Vector& s_obs,
                                const Acceptance& accept, const std::optional<Vector>& scales) {
    const auto m = static_cast<std::size_t>(stats.rows());
    if (m == 0) throw ValidationError("rejection_abc: empty batch");
    if (thetas.rows() != stats.rows()) throw ValidationError("rejection_abc: thetas and stats differ in rows");
    if (s_obs.size() != stats.cols()) {
        throw ValidationError("rejection_abc: s_obs has " + std::to_string(s_obs.size()) + " entries, batch has " +
                              std::to_string(stats.cols()) + " statistics");
    }
    const Vector sc = scales ? *scales : compute_scales(stats);

    std::vector<double> dist(m);
    for (std::size_t i = 0; i < m; ++i) {
        dist[i] = abc_distance(stats.row(static_cast<Eigen::Index>(i)).transpose(), s_obs, sc);
    }

    std::vector<std::size_t> kept;
    double bandwidth = 0.0;
    if (accept.mode == Acceptance::Mode::fraction) {
        if (!(accept.value > 0.0 && accept.value <= 1.0)) {
            throw ValidationError("rejection_abc: fraction must be in (0, 1]");
        }
        const double raw = accept.value * static_cast<double>(m);
        auto k = static_cast<std::size_t>(std::ceil(raw * (1.0 - 1e-12)));
        k = std::clamp<std::size_t>(k, 1, m);
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), closer);
        kept.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(kept.begin(), kept.end());
        for (auto i : kept) bandwidth = std::max(bandwidth, dist[i]);
    } else {
        if (!(accept.value >= 0.0)) throw ValidationError("rejection_abc: epsilon must be >= 0");
        for (std::size_t i = 0; i < m; ++i) {
            if (dist[i] <= accept.value) kept.push_back(i);
        }
        if (kept.empty()) {
            const double min_d = *std::min_element(dist.begin(), dist.end());
            throw NumericalError("no draws accepted at epsilon " + format_double(accept.value) +
                                 " (minimum observed distance " + format_double(min_d) + ")");
        }
        bandwidth = accept.value;
    }

    WeightedPosterior post;
    const auto n = static_cast<Eigen::Index>(kept.size());
    post.thetas = select_rows(thetas, kept);
    post.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
    post.acceptance.indices = kept;
    post.acceptance.candidates = m;
    post.acceptance.distances.reserve(kept.size());
    double realized = 0.0;
    for (auto i : kept) {
        post.acceptance.distances.push_back(dist[i]);
        realized = std::max(realized, dist[i]);
    }
    post.acceptance.epsilon = realized;
    post.provenance.stage = "rejection";

    if (accept.kernel == Acceptance::Kernel::epanechnikov && bandwidth > 0.0) {
        Vector w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = post.acceptance.distances[static_cast<std::size_t>(i)] / bandwidth;
            w(i) = std::max(0.0, 1.0 - u * u);
        }
        const double total = exact_sum({w.data(), static_cast<std::size_t>(n)});
        if (total > 0.0) post.weights = w / total;
    }
    return post;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
    Matrix out(static_cast<Eigen::Index>(indices.size()), m.cols());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(indices[k]));
    }
    return out;
}

// --- truncation ------------------------------------------------------------

TruncationRegion truncation_from_pilot(const WeightedPosterior& accepted, double expand) {
    if (accepted.size() < 2) throw ValidationError("truncation_from_pilot: need at least 2 accepted draws");
    if (!(expand >= 0.0) || !std::isfinite(expand)) throw ValidationError("truncation_from_pilot: expand must be >= 0");
    TruncationRegion region;
    for (Eigen::Index j = 0; j < accepted.thetas.cols(); ++j) {
        const double lo = accepted.thetas.col(j).minCoeff();
        const double hi = accepted.thetas.col(j).maxCoeff();
        const double range = hi - lo;
        if (range > 0.0) {
            region.lo.push_back(lo - expand * range);
            region.hi.push_back(hi + expand * range);
        } else {
            const double widen = 1e-8 * std::max(1.0, std::abs(lo));
            region.lo.push_back(lo - widen);
            region.hi.push_back(hi + widen);
        }
    }
    return region;
}

// --- regression adjustment -------------------------------------------------

WeightedPosterior regression_adjust(const WeightedPosterior& posterior, const Matrix& stats_of_accepted,
                                    const Vector& s_obs, double ridge_lambda,
                                    std::span<const ParamTransform> transforms) {
    posterior.validate();
    const auto n = posterior.size();
    const auto d = static_cast<std::size_t>(stats_of_accepted.cols());
    const auto p = posterior.param_dim();
    if (static_cast<std::size_t>(stats_of_accepted.rows()) != n) {
        throw ValidationError("regression_adjust: statistics rows do not match accepted draws");
    }
    if (static_cast<std::size_t>(s_obs.size()) != d) throw ValidationError("regression_adjust: s_obs dimension mismatch");
    if (n < d + 2) {
        throw ValidationError("regression_adjust: " + std::to_string(n) + " accepted draws is too few for " +
                              std::to_string(d) + " statistics");
    }
    if (!transforms.empty() && transforms.size() != p) {
        throw ValidationError("regression_adjust: need one transform per parameter");
    }

    Matrix work = posterior.thetas;
    for (std::size_t j = 0; j < transforms.size(); ++j) {
        if (transforms[j] != ParamTransform::log) continue;
        const auto col = static_cast<Eigen::Index>(j);
        if ((work.col(col).array() <= 0.0).any()) {
            throw ValidationError("regression_adjust: log transform needs positive values in parameter " +
                                  std::to_string(j + 1));
        }
        work.col(col) = work.col(col).array().log().matrix();
    }

    std::span<const double> weights;
    if (!posterior.has_uniform_weights()) weights = {posterior.weights.data(), n};
    const LinearFit fit = fit_linear(stats_of_accepted, work, ridge_lambda, weights);

    const Matrix innovation = stats_of_accepted.rowwise() - s_obs.transpose();
    work -= innovation * fit.coefficients.transpose();

    for (std::size_t j = 0; j < transforms.size(); ++j) {
        if (transforms[j] != ParamTransform::log) continue;
        const auto col = static_cast<Eigen::Index>(j);
        work.col(col) = work.col(col).array().exp().matrix();
    }

    WeightedPosterior out = posterior;
    out.thetas = std::move(work);
    out.provenance.stage = "regression_adjust";
    out.provenance.condition_number = fit.condition_number;
    out.provenance.vifs.assign(fit.vifs.data(), fit.vifs.data() + fit.vifs.size());
    return out;
}

}  // namespace sabc
