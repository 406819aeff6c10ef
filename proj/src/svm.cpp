#include "kdx/svm.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "kdx/detail/json_mat.hpp"
#include "kdx/errors.hpp"
#include "kdx/rng.hpp"

namespace kdx {

namespace {

void check_training_inputs(const Matrix& x, const Vector& y,
                           const SvmTrainOptions& opts) {
    if (x.rows() == 0 || x.cols() == 0) throw EmptyInput("svm: empty training data");
    if (x.rows() != y.size())
        throw SampleCountMismatch("svm: x has " + std::to_string(x.rows()) +
                                  " rows but y has " + std::to_string(y.size()) +
                                  " entries");
    if (!x.allFinite() || !y.allFinite())
        throw NonFiniteInput("svm: training data contains non-finite values");
    bool has_pos = false, has_neg = false;
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] == 1.0)
            has_pos = true;
        else if (y[i] == -1.0)
            has_neg = true;
        else
            throw ConfigError("svm: labels must be exactly -1 or +1, got " +
                              std::to_string(y[i]));
    }
    if (!has_pos || !has_neg)
        throw SingleClassInput("svm: training set contains a single class");
    if (!(opts.c > 0.0)) throw ConfigError("svm: box constraint c must be > 0");
    if (!(opts.tol > 0.0)) throw ConfigError("svm: tolerance must be > 0");
}

// State for one SMO run over the precomputed Gram matrix.
struct SmoState {
    const Matrix& k;
    const Vector& y;
    Vector alpha;
    double b = 0.0;
    double c;
    double tol;
    long updates = 0;
    long max_updates;
    Rng rng;

    SmoState(const Matrix& gram, const Vector& labels,
             const SvmTrainOptions& opts)
        : k(gram),
          y(labels),
          alpha(Vector::Zero(labels.size())),
          c(opts.c),
          tol(opts.tol),
          max_updates(opts.max_passes < 0 ? 100 * labels.size()
                                          : opts.max_passes),
          rng(opts.seed) {}

    double decision(Index i) const {
        double f = b;
        for (Index j = 0; j < alpha.size(); ++j)
            if (alpha[j] > 0.0) f += alpha[j] * y[j] * k(j, i);
        return f;
    }

    double error(Index i) const { return decision(i) - y[i]; }

    double snap(double a) const {
        if (a < 1e-10 * c) return 0.0;
        if (a > c * (1.0 - 1e-10)) return c;
        return a;
    }

    bool violates_kkt(Index i) const {
        const double r = y[i] * error(i);
        return (r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0);
    }

    // Jointly optimize the pair (i, j); returns whether alpha changed.
    bool take_step(Index i, Index j) {
        if (i == j) return false;
        const double ai = alpha[i], aj = alpha[j];
        const double yi = y[i], yj = y[j];
        const double ei = error(i), ej = error(j);
        const double s = yi * yj;

        double lo, hi;
        if (yi != yj) {
            lo = std::max(0.0, aj - ai);
            hi = std::min(c, c + aj - ai);
        } else {
            lo = std::max(0.0, ai + aj - c);
            hi = std::min(c, ai + aj);
        }
        if (lo >= hi) return false;

        const double kii = k(i, i), kjj = k(j, j), kij = k(i, j);
        const double eta = kii + kjj - 2.0 * kij;

        double aj_new;
        if (eta > 0.0) {
            aj_new = aj + yj * (ei - ej) / eta;
            aj_new = std::clamp(aj_new, lo, hi);
        } else {
            // Flat or concave direction: compare the objective at the two
            // segment endpoints and move to the strictly better one.
            const double f1 = yi * (ei + b) - ai * kii - s * aj * kij;
            const double f2 = yj * (ej + b) - aj * kjj - s * ai * kij;
            const double l1 = ai + s * (aj - lo);
            const double h1 = ai + s * (aj - hi);
            const double psi_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * kii +
                                  0.5 * lo * lo * kjj + s * lo * l1 * kij;
            const double psi_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * kii +
                                  0.5 * hi * hi * kjj + s * hi * h1 * kij;
            const double eps = 1e-12 * (std::abs(psi_lo) + std::abs(psi_hi) + 1.0);
            if (psi_lo < psi_hi - eps)
                aj_new = lo;
            else if (psi_lo > psi_hi + eps)
                aj_new = hi;
            else
                return false;
        }

        if (std::abs(aj_new - aj) < 1e-10 * (aj_new + aj + 1.0)) return false;
        double ai_new = ai + s * (aj - aj_new);
        // Snap round-off residues onto the box bounds so they cannot linger
        // as phantom KKT violations.
        ai_new = snap(ai_new);
        aj_new = snap(aj_new);

        const double b1 = b - ei - yi * (ai_new - ai) * kii -
                          yj * (aj_new - aj) * kij;
        const double b2 = b - ej - yi * (ai_new - ai) * kij -
                          yj * (aj_new - aj) * kjj;
        if (ai_new > 0.0 && ai_new < c)
            b = b1;
        else if (aj_new > 0.0 && aj_new < c)
            b = b2;
        else
            b = 0.5 * (b1 + b2);

        alpha[i] = ai_new;
        alpha[j] = aj_new;
        ++updates;
        return true;
    }

    // Pick the best partner for i by |E_i - E_j|, falling back to a seeded
    // scan over all indices when the heuristic step is rejected.
    bool examine(Index i) {
        if (!violates_kkt(i)) return false;
        const Index n = alpha.size();
        const double ei = error(i);

        Index best = -1;
        double best_gap = -1.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double gap = std::abs(ei - error(j));
            if (gap > best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best >= 0 && take_step(i, best)) return true;

        const Index start = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        for (Index off = 0; off < n; ++off) {
            const Index j = (start + off) % n;
            if (j == i || j == best) continue;
            if (take_step(i, j)) return true;
        }
        return false;
    }

    bool kkt_clean() const {
        for (Index i = 0; i < alpha.size(); ++i)
            if (violates_kkt(i)) return false;
        return true;
    }

    // Platt's outer loop: alternate sweeps over all samples and sweeps over
    // the non-bound subset until a full sweep makes no progress or the
    // update budget runs out.
    bool run() {
        const Index n = alpha.size();
        bool examine_all = true;
        while (updates < max_updates) {
            long changed = 0;
            for (Index i = 0; i < n && updates < max_updates; ++i) {
                if (!examine_all && (alpha[i] <= 0.0 || alpha[i] >= c))
                    continue;
                if (examine(i)) ++changed;
            }
            if (examine_all) {
                if (changed == 0) break;
                examine_all = false;
            } else if (changed == 0) {
                examine_all = true;
            }
        }
        return kkt_clean();
    }
};

}  // namespace

SvmModel::SvmModel(KernelSpec kernel, Matrix sv_x, Vector sv_coef, double bias,
                   double c, bool converged)
    : kernel_(std::move(kernel)),
      sv_x_(std::move(sv_x)),
      sv_coef_(std::move(sv_coef)),
      bias_(bias),
      c_(c),
      converged_(converged) {}

SvmModel SvmModel::train(const Matrix& x, const Vector& y,
                         const KernelSpec& kernel,
                         const SvmTrainOptions& opts) {
    check_training_inputs(x, y, opts);
    kernel.validate(x.cols());

    const Matrix gram = kdx::gram(kernel, x);
    SmoState state(gram, y, opts);
    const bool converged = state.run();

    std::vector<Index> kept;
    for (Index i = 0; i < state.alpha.size(); ++i)
        if (state.alpha[i] > 1e-12) kept.push_back(i);

    Matrix sv_x(static_cast<Index>(kept.size()), x.cols());
    Vector sv_coef(static_cast<Index>(kept.size()));
    for (Index r = 0; r < static_cast<Index>(kept.size()); ++r) {
        sv_x.row(r) = x.row(kept[static_cast<std::size_t>(r)]);
        sv_coef[r] = state.alpha[kept[static_cast<std::size_t>(r)]] *
                     y[kept[static_cast<std::size_t>(r)]];
    }
    return SvmModel(kernel, std::move(sv_x), std::move(sv_coef), state.b,
                    opts.c, converged);
}

double SvmModel::decision(const Vector& xs) const {
    double f = bias_;
    for (Index i = 0; i < sv_x_.rows(); ++i)
        f += sv_coef_[i] * kernel_eval(kernel_, Vector(sv_x_.row(i).transpose()), xs);
    return f;
}

Vector SvmModel::decision(const Matrix& xs) const {
    Vector out(xs.rows());
    for (Index i = 0; i < xs.rows(); ++i)
        out[i] = decision(Vector(xs.row(i).transpose()));
    return out;
}

int SvmModel::predict(const Vector& xs) const {
    return decision(xs) >= 0.0 ? 1 : -1;
}

Vector SvmModel::decision_gradient(const Vector& xs) const {
    Vector g = Vector::Zero(xs.size());
    for (Index i = 0; i < sv_x_.rows(); ++i)
        g += sv_coef_[i] *
             kernel_grad_x(kernel_, xs, Vector(sv_x_.row(i).transpose()));
    return g;
}

SmoothGrad SvmModel::smooth_decision_gradient(const Vector& xs) const {
    const double t = std::tanh(decision(xs));
    SmoothGrad out;
    out.mask_term = 1.0 - t * t;
    out.kernel_grad = decision_gradient(xs);
    out.full_grad = out.mask_term * out.kernel_grad;
    return out;
}

DerivField SvmModel::smooth_decision_field(const Matrix& xs) const {
    DerivField field;
    field.values.resize(xs.rows(), xs.cols());
    for (Index i = 0; i < xs.rows(); ++i)
        field.values.row(i) =
            smooth_decision_gradient(Vector(xs.row(i).transpose()))
                .full_grad.transpose();
    return field;
}

nlohmann::json SvmModel::to_json() const {
    nlohmann::json j;
    j["kind"] = "svm";
    j["kernel"] = kernel_.to_json();
    j["sv_x"] = detail::matrix_to_json(sv_x_);
    j["sv_coef"] = detail::vector_to_json(sv_coef_);
    j["bias"] = bias_;
    j["c"] = c_;
    j["converged"] = converged_;
    return j;
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
    detail::require_kind(j, "svm");
    KernelSpec kernel =
        KernelSpec::from_json(detail::require_field(j, "kernel"));
    Matrix sv_x = detail::matrix_from_json(
        detail::require_field(j, "sv_x"), "svm sv_x");
    Vector sv_coef = detail::vector_from_json(
        detail::require_field(j, "sv_coef"), "svm sv_coef");
    if (sv_x.rows() != sv_coef.size())
        throw ConfigError("svm model: sv_x and sv_coef row counts differ");
    const auto& jb = detail::require_field(j, "bias");
    const auto& jc = detail::require_field(j, "c");
    if (!jb.is_number() || !jc.is_number())
        throw ConfigError("svm model: bias and c must be numbers");
    const double bias = jb.get<double>();
    const double c = jc.get<double>();
    if (!(c > 0.0)) throw ConfigError("svm model: c must be > 0");
    bool converged = true;
    if (j.contains("converged")) {
        if (!j["converged"].is_boolean())
            throw ConfigError("svm model: converged must be a boolean");
        converged = j["converged"].get<bool>();
    }
    if (sv_x.rows() > 0) kernel.validate(sv_x.cols());
    return SvmModel(std::move(kernel), std::move(sv_x), std::move(sv_coef),
                    bias, c, converged);
}

}  // namespace kdx
