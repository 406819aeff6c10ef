#include "kdx/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "kdx/detail/parallel.hpp"

namespace kdx {

namespace {

double ipow(double base, int exp) {
    double r = 1.0;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// sinc value and its first two derivatives w.r.t. the *first argument*,
// with a series branch near coincidence (the closed forms divide by s).
struct SincParts {
    double k;
    double d1;
    double d2;
};

SincParts sinc_parts(double w, double u) {
    const double s = w * u;
    if (std::abs(s) < 1e-4) {
        const double s2 = s * s;
        return {
            1.0 - s2 / 6.0 + s2 * s2 / 120.0,
            w * s * (-1.0 / 3.0 + s2 / 30.0),
            w * w * (-1.0 / 3.0 + s2 / 10.0 - s2 * s2 / 168.0),
        };
    }
    const double sin_s = std::sin(s);
    const double cos_s = std::cos(s);
    return {
        sin_s / s,
        w * (cos_s * s - sin_s) / (s * s),
        w * w * (-sin_s / s - 2.0 * cos_s / (s * s) + 2.0 * sin_s / (s * s * s)),
    };
}

// c * v * v' filled on the upper triangle and mirrored, so the result is
// symmetric bit-exactly (expression templates may round (j,k) and (k,j)
// differently).
Matrix sym_outer(double c, const Vector& v) {
    const Index d = v.size();
    Matrix m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = i; j < d; ++j) {
            m(i, j) = c * v[i] * v[j];
            m(j, i) = m(i, j);
        }
    return m;
}

void check_pair(const KernelSpec& spec, const Vector& x, const Vector& y) {
    if (x.size() != y.size())
        throw DimensionMismatch("kernel: operand lengths differ (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
    if (!x.allFinite() || !y.allFinite())
        throw NonFiniteInput("kernel: operands contain non-finite entries");
    spec.validate(x.size());
}

void check_matrix(const KernelSpec& spec, const Matrix& x) {
    if (x.rows() == 0) throw EmptyInput("kernel: no samples");
    if (!x.allFinite())
        throw NonFiniteInput("kernel: samples contain non-finite entries");
    spec.validate(x.cols());
}

double eval_unchecked(const KernelSpec& spec, const Vector& x,
                      const Vector& y) {
    switch (spec.family) {
        case KernelFamily::Linear:
            return x.dot(y);
        case KernelFamily::Poly:
            return ipow(spec.gamma * x.dot(y) + spec.coef0, spec.degree);
        case KernelFamily::Rbf:
            return std::exp(-spec.gamma * (x - y).squaredNorm());
        case KernelFamily::Tanh:
            return std::tanh(spec.gamma * x.dot(y) + spec.coef0);
        case KernelFamily::Ard: {
            double q = 0.0;
            for (Index d = 0; d < x.size(); ++d) {
                const double z =
                    (x[d] - y[d]) / spec.lengthscales[static_cast<std::size_t>(d)];
                q += z * z;
            }
            return spec.signal_var * std::exp(-0.5 * q);
        }
        case KernelFamily::Sinc:
            return sinc_parts(spec.bandwidth, x[0] - y[0]).k;
    }
    throw ConfigError("kernel: unknown family");
}

Vector grad_unchecked(const KernelSpec& spec, const Vector& x,
                      const Vector& y) {
    const Index d = x.size();
    switch (spec.family) {
        case KernelFamily::Linear:
            return y;
        case KernelFamily::Poly: {
            const double base = spec.gamma * x.dot(y) + spec.coef0;
            return Vector(spec.gamma * spec.degree * ipow(base, spec.degree - 1) *
                          y);
        }
        case KernelFamily::Rbf: {
            const double k = std::exp(-spec.gamma * (x - y).squaredNorm());
            return Vector(-2.0 * spec.gamma * k * (x - y));
        }
        case KernelFamily::Tanh: {
            const double t = std::tanh(spec.gamma * x.dot(y) + spec.coef0);
            return Vector(spec.gamma * (1.0 - t * t) * y);
        }
        case KernelFamily::Ard: {
            const double k = eval_unchecked(spec, x, y);
            Vector g(d);
            for (Index i = 0; i < d; ++i) {
                const double l = spec.lengthscales[static_cast<std::size_t>(i)];
                g[i] = -((x[i] - y[i]) / (l * l)) * k;
            }
            return g;
        }
        case KernelFamily::Sinc: {
            Vector g(1);
            g[0] = sinc_parts(spec.bandwidth, x[0] - y[0]).d1;
            return g;
        }
    }
    throw ConfigError("kernel: unknown family");
}

Matrix hessian_unchecked(const KernelSpec& spec, const Vector& x,
                         const Vector& y) {
    const Index d = x.size();
    switch (spec.family) {
        case KernelFamily::Linear:
            return Matrix::Zero(d, d);
        case KernelFamily::Poly: {
            if (spec.degree < 2) return Matrix::Zero(d, d);
            const double base = spec.gamma * x.dot(y) + spec.coef0;
            const double s = spec.degree * (spec.degree - 1) * spec.gamma *
                             spec.gamma * ipow(base, spec.degree - 2);
            return sym_outer(s, y);
        }
        case KernelFamily::Rbf: {
            const Vector diff = x - y;
            const double k = std::exp(-spec.gamma * diff.squaredNorm());
            Matrix h = sym_outer(4.0 * spec.gamma * spec.gamma * k, diff);
            h.diagonal().array() -= 2.0 * spec.gamma * k;
            return h;
        }
        case KernelFamily::Tanh: {
            const double t = std::tanh(spec.gamma * x.dot(y) + spec.coef0);
            const double s = -2.0 * spec.gamma * spec.gamma * (1.0 - t * t) * t;
            return sym_outer(s, y);
        }
        case KernelFamily::Ard: {
            const double k = eval_unchecked(spec, x, y);
            Vector r(d);
            for (Index i = 0; i < d; ++i) {
                const double l = spec.lengthscales[static_cast<std::size_t>(i)];
                r[i] = (x[i] - y[i]) / (l * l);
            }
            Matrix h = sym_outer(k, r);
            for (Index i = 0; i < d; ++i) {
                const double l = spec.lengthscales[static_cast<std::size_t>(i)];
                h(i, i) -= k / (l * l);
            }
            return h;
        }
        case KernelFamily::Sinc: {
            Matrix h(1, 1);
            h(0, 0) = sinc_parts(spec.bandwidth, x[0] - y[0]).d2;
            return h;
        }
    }
    throw ConfigError("kernel: unknown family");
}

}  // namespace

std::string family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Poly: return "poly";
        case KernelFamily::Rbf: return "rbf";
        case KernelFamily::Tanh: return "tanh";
        case KernelFamily::Ard: return "ard";
        case KernelFamily::Sinc: return "sinc";
    }
    return "unknown";
}

KernelFamily family_from_name(const std::string& name) {
    if (name == "linear") return KernelFamily::Linear;
    if (name == "poly") return KernelFamily::Poly;
    if (name == "rbf") return KernelFamily::Rbf;
    if (name == "tanh") return KernelFamily::Tanh;
    if (name == "ard") return KernelFamily::Ard;
    if (name == "sinc") return KernelFamily::Sinc;
    throw ConfigError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::linear() {
    KernelSpec s;
    s.family = KernelFamily::Linear;
    return s;
}

KernelSpec KernelSpec::poly(double gamma, double coef0, int degree) {
    KernelSpec s;
    s.family = KernelFamily::Poly;
    s.gamma = gamma;
    s.coef0 = coef0;
    s.degree = degree;
    return s;
}

KernelSpec KernelSpec::rbf(double gamma) {
    KernelSpec s;
    s.family = KernelFamily::Rbf;
    s.gamma = gamma;
    return s;
}

KernelSpec KernelSpec::tanh(double gamma, double coef0) {
    KernelSpec s;
    s.family = KernelFamily::Tanh;
    s.gamma = gamma;
    s.coef0 = coef0;
    return s;
}

KernelSpec KernelSpec::ard(std::vector<double> lengthscales,
                           double signal_var) {
    KernelSpec s;
    s.family = KernelFamily::Ard;
    s.lengthscales = std::move(lengthscales);
    s.signal_var = signal_var;
    return s;
}

KernelSpec KernelSpec::sinc(double bandwidth) {
    KernelSpec s;
    s.family = KernelFamily::Sinc;
    s.bandwidth = bandwidth;
    return s;
}

void KernelSpec::validate(Index dim) const {
    const auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("kernel spec: ") + what +
                              " must be positive and finite");
    };
    switch (family) {
        case KernelFamily::Linear:
            break;
        case KernelFamily::Poly:
            positive(gamma, "gamma");
            if (!(coef0 >= 0.0) || !std::isfinite(coef0))
                throw ConfigError("kernel spec: coef0 must be >= 0");
            if (degree < 1)
                throw ConfigError("kernel spec: degree must be an integer >= 1");
            break;
        case KernelFamily::Rbf:
            positive(gamma, "gamma");
            break;
        case KernelFamily::Tanh:
            positive(gamma, "gamma");
            if (!(coef0 >= 0.0) || !std::isfinite(coef0))
                throw ConfigError("kernel spec: coef0 must be >= 0");
            break;
        case KernelFamily::Ard:
            if (lengthscales.empty())
                throw ConfigError("kernel spec: ard requires lengthscales");
            for (double l : lengthscales) positive(l, "lengthscale");
            positive(signal_var, "signal_var");
            if (dim >= 0 && static_cast<Index>(lengthscales.size()) != dim)
                throw DimensionMismatch(
                    "kernel spec: ard has " +
                    std::to_string(lengthscales.size()) +
                    " lengthscales but data has dimension " +
                    std::to_string(dim));
            break;
        case KernelFamily::Sinc:
            positive(bandwidth, "bandwidth");
            if (dim >= 0 && dim != 1)
                throw DimensionMismatch(
                    "kernel spec: sinc is defined for 1-d inputs only, got "
                    "dimension " +
                    std::to_string(dim));
            break;
    }
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json j;
    j["family"] = family_name(family);
    switch (family) {
        case KernelFamily::Linear:
            break;
        case KernelFamily::Poly:
            j["gamma"] = gamma;
            j["coef0"] = coef0;
            j["degree"] = degree;
            break;
        case KernelFamily::Rbf:
            j["gamma"] = gamma;
            break;
        case KernelFamily::Tanh:
            j["gamma"] = gamma;
            j["coef0"] = coef0;
            break;
        case KernelFamily::Ard:
            j["lengthscales"] = lengthscales;
            j["signal_var"] = signal_var;
            break;
        case KernelFamily::Sinc:
            j["bandwidth"] = bandwidth;
            break;
    }
    return j;
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw ConfigError("kernel spec JSON: expected an object");
    if (!j.contains("family") || !j.at("family").is_string())
        throw ConfigError("kernel spec JSON: missing string field 'family'");

    KernelSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());

    std::vector<std::string> allowed = {"family"};
    switch (spec.family) {
        case KernelFamily::Linear:
            break;
        case KernelFamily::Poly:
            allowed.insert(allowed.end(), {"gamma", "coef0", "degree"});
            break;
        case KernelFamily::Rbf:
            allowed.emplace_back("gamma");
            break;
        case KernelFamily::Tanh:
            allowed.insert(allowed.end(), {"gamma", "coef0"});
            break;
        case KernelFamily::Ard:
            allowed.insert(allowed.end(), {"lengthscales", "signal_var"});
            break;
        case KernelFamily::Sinc:
            allowed.emplace_back("bandwidth");
            break;
    }
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) ==
            allowed.end())
            throw ConfigError("kernel spec JSON: unknown field '" + item.key() +
                              "' for family '" + family_name(spec.family) +
                              "'");
    }

    const auto get_double = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j.at(key).is_number())
            throw ConfigError(std::string("kernel spec JSON: field '") + key +
                              "' must be a number");
        return j.at(key).get<double>();
    };

    spec.gamma = get_double("gamma", spec.gamma);
    spec.coef0 = get_double("coef0", spec.coef0);
    spec.signal_var = get_double("signal_var", spec.signal_var);
    spec.bandwidth = get_double("bandwidth", spec.bandwidth);
    if (j.contains("degree")) {
        if (!j.at("degree").is_number_integer())
            throw ConfigError("kernel spec JSON: 'degree' must be an integer");
        spec.degree = j.at("degree").get<int>();
    }
    if (spec.family == KernelFamily::Ard) {
        if (!j.contains("lengthscales"))
            throw ConfigError("kernel spec JSON: ard requires 'lengthscales'");
        const auto& ls = j.at("lengthscales");
        if (!ls.is_array() || ls.empty())
            throw ConfigError(
                "kernel spec JSON: 'lengthscales' must be a non-empty array");
        spec.lengthscales.clear();
        for (const auto& v : ls) {
            if (!v.is_number())
                throw ConfigError(
                    "kernel spec JSON: 'lengthscales' entries must be numbers");
            spec.lengthscales.push_back(v.get<double>());
        }
    }
    spec.validate();
    return spec;
}

double kernel_eval(const KernelSpec& spec, const Vector& x, const Vector& y) {
    check_pair(spec, x, y);
    return eval_unchecked(spec, x, y);
}

Vector kernel_grad_x(const KernelSpec& spec, const Vector& x,
                     const Vector& y) {
    check_pair(spec, x, y);
    return grad_unchecked(spec, x, y);
}

Matrix kernel_hessian_x(const KernelSpec& spec, const Vector& x,
                        const Vector& y) {
    check_pair(spec, x, y);
    return hessian_unchecked(spec, x, y);
}

double rbf_nth_partial(const KernelSpec& spec, const Vector& x,
                       const Vector& y, int j, int m) {
    if (spec.family != KernelFamily::Rbf)
        throw ConfigError("rbf_nth_partial: kernel family must be rbf");
    if (m < 1)
        throw InvalidOrder("rbf_nth_partial: order must be >= 1, got " +
                           std::to_string(m));
    check_pair(spec, x, y);
    if (j < 0 || j >= x.size())
        throw DimensionMismatch("rbf_nth_partial: coordinate " +
                                std::to_string(j) + " out of range for d=" +
                                std::to_string(x.size()));

    // g(x^j) = -gamma*||x - y||^2 is quadratic in x^j, so the chain-rule
    // recurrence closes with two terms: D_m = g'*D_{m-1} + (m-1)*g''*D_{m-2}.
    const double k = std::exp(-spec.gamma * (x - y).squaredNorm());
    const double gp = -2.0 * spec.gamma * (x[j] - y[j]);
    const double gpp = -2.0 * spec.gamma;
    double dm_2 = k;        // D_0
    double dm_1 = gp * k;   // D_1
    for (int i = 2; i <= m; ++i) {
        const double dm = gp * dm_1 + (i - 1) * gpp * dm_2;
        dm_2 = dm_1;
        dm_1 = dm;
    }
    return dm_1;
}

Matrix gram(const KernelSpec& spec, const Matrix& x, int threads) {
    check_matrix(spec, x);
    const Index n = x.rows();
    Matrix k(n, n);
    detail::parallel_for(n, threads, [&](Index i) {
        const Vector xi = x.row(i).transpose();
        for (Index j = i; j < n; ++j)
            k(i, j) = eval_unchecked(spec, xi, x.row(j).transpose());
    });
    // Mirror the upper triangle so symmetry holds bit-exactly.
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) k(i, j) = k(j, i);
    return k;
}

Matrix gram_cross(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    check_matrix(spec, a);
    check_matrix(spec, b);
    if (a.cols() != b.cols())
        throw DimensionMismatch("gram_cross: dimensions differ (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()) + ")");
    Matrix k(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        const Vector ai = a.row(i).transpose();
        for (Index j = 0; j < b.rows(); ++j)
            k(i, j) = eval_unchecked(spec, ai, b.row(j).transpose());
    }
    return k;
}

Vector gram_grad_col(const KernelSpec& spec, const Matrix& x, const Vector& xs,
                     int j) {
    check_matrix(spec, x);
    if (xs.size() != x.cols())
        throw DimensionMismatch("gram_grad_col: point dimension " +
                                std::to_string(xs.size()) +
                                " != data dimension " +
                                std::to_string(x.cols()));
    if (!xs.allFinite())
        throw NonFiniteInput("gram_grad_col: point has non-finite entries");
    if (j < 0 || j >= x.cols())
        throw DimensionMismatch("gram_grad_col: coordinate out of range");
    Vector col(x.rows());
    for (Index i = 0; i < x.rows(); ++i)
        col[i] = grad_unchecked(spec, xs, x.row(i).transpose())[j];
    return col;
}

Matrix gram_grad(const KernelSpec& spec, const Matrix& a, const Matrix& b,
                 int j) {
    check_matrix(spec, a);
    check_matrix(spec, b);
    if (a.cols() != b.cols())
        throw DimensionMismatch("gram_grad: dimensions differ");
    if (j < 0 || j >= a.cols())
        throw DimensionMismatch("gram_grad: coordinate out of range");
    Matrix g(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        const Vector ai = a.row(i).transpose();
        for (Index l = 0; l < b.rows(); ++l)
            g(i, l) = grad_unchecked(spec, ai, b.row(l).transpose())[j];
    }
    return g;
}

Matrix gram_hessian_diag(const KernelSpec& spec, const Matrix& a,
                         const Matrix& b, int j) {
    check_matrix(spec, a);
    check_matrix(spec, b);
    if (a.cols() != b.cols())
        throw DimensionMismatch("gram_hessian_diag: dimensions differ");
    if (j < 0 || j >= a.cols())
        throw DimensionMismatch("gram_hessian_diag: coordinate out of range");
    Matrix h(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        const Vector ai = a.row(i).transpose();
        for (Index l = 0; l < b.rows(); ++l)
            h(i, l) = hessian_unchecked(spec, ai, b.row(l).transpose())(j, j);
    }
    return h;
}

Vector poly2_feature_map(const Vector& x) {
    if (x.size() != 2)
        throw DimensionMismatch(
            "poly2_feature_map: defined for 2-d inputs, got d=" +
            std::to_string(x.size()));
    if (!x.allFinite())
        throw NonFiniteInput("poly2_feature_map: non-finite input");
    const double r2 = std::sqrt(2.0);
    Vector phi(6);
    phi << 1.0, x[0] * x[0], x[1] * x[1], r2 * x[0], r2 * x[1],
        r2 * x[0] * x[1];
    return phi;
}

double median_heuristic_gamma(const Matrix& x) {
    if (!x.allFinite())
        throw NonFiniteInput("median_heuristic_gamma: non-finite input");
    const Index n = x.rows();
    if (n < 2) return 1.0;
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            dists.push_back((x.row(i) - x.row(j)).norm());

    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid),
                     dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        const auto lower = std::max_element(
            dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + *lower);
    }
    if (median <= 0.0) return 1.0;
    return 1.0 / (2.0 * median * median);
}

}  // namespace kdx
