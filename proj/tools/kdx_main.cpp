// kdx: kernel-methods toolkit with analytic input derivatives.
//
// Subcommands: gen, kernel eval|grad|gram, gpr fit|predict|sens|norms,
// svm train|predict|sens, density fit|eval|ridge, hsic value|grad|pvalue|
// unfold. Exit codes: 0 success, 1 usage/input error, 2 computation error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <kdx/csv.hpp>
#include <kdx/density.hpp>
#include <kdx/errors.hpp>
#include <kdx/gpr.hpp>
#include <kdx/hsic.hpp>
#include <kdx/kernels.hpp>
#include <kdx/model_select.hpp>
#include <kdx/sensitivity.hpp>
#include <kdx/svg.hpp>
#include <kdx/svm.hpp>
#include <kdx/toydata.hpp>

namespace {

using kdx::Dataset;
using kdx::Index;
using kdx::KernelSpec;
using kdx::Matrix;
using kdx::Vector;

// ---------------------------------------------------------------------------
// shared option bundles

struct KernelFlags {
    std::string family = "rbf";
    double gamma = 1.0;
    double coef0 = 1.0;
    int degree = 2;
    std::string lengthscales;
    double signal_var = 1.0;
    double bandwidth = 1.0;
    std::string kernel_json;
};

Vector parse_numbers(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size())
            throw kdx::ConfigError(what + ": '" + cell + "' is not a number");
        values.push_back(v);
    }
    if (values.empty()) throw kdx::ConfigError(what + ": empty number list");
    Vector v(static_cast<Index>(values.size()));
    for (Index i = 0; i < v.size(); ++i)
        v[i] = values[static_cast<std::size_t>(i)];
    return v;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kdx::ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw kdx::ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw kdx::ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw kdx::ConfigError("write to '" + path + "' failed");
}

void add_kernel_flags(CLI::App* cmd, KernelFlags& kf) {
    cmd->add_option("--family", kf.family,
                    "kernel family: linear|poly|rbf|tanh|ard|sinc");
    cmd->add_option("--gamma", kf.gamma, "scale parameter (poly/rbf/tanh)");
    cmd->add_option("--coef0", kf.coef0, "offset parameter (poly/tanh)");
    cmd->add_option("--degree", kf.degree, "polynomial degree");
    cmd->add_option("--lengthscales", kf.lengthscales,
                    "comma-separated ard lengthscales");
    cmd->add_option("--signal-var", kf.signal_var, "ard signal variance");
    cmd->add_option("--bandwidth", kf.bandwidth, "sinc bandwidth");
    cmd->add_option("--kernel-json", kf.kernel_json,
                    "kernel spec JSON file (overrides the inline flags)");
}

KernelSpec build_kernel(const KernelFlags& kf) {
    if (!kf.kernel_json.empty())
        return KernelSpec::from_json(load_json(kf.kernel_json));
    KernelSpec spec;
    spec.family = kdx::family_from_name(kf.family);
    spec.gamma = kf.gamma;
    spec.coef0 = kf.coef0;
    spec.degree = kf.degree;
    spec.signal_var = kf.signal_var;
    spec.bandwidth = kf.bandwidth;
    if (!kf.lengthscales.empty()) {
        const Vector ls = parse_numbers(kf.lengthscales, "--lengthscales");
        spec.lengthscales.assign(ls.data(), ls.data() + ls.size());
    }
    spec.validate();
    return spec;
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("KDX_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

// ---------------------------------------------------------------------------
// csv/svg plumbing

Matrix load_features(const std::string& path) { return kdx::read_dataset(path).X; }

Dataset load_labeled(const std::string& path, Dataset::Target want,
                     const std::string& need) {
    Dataset data = kdx::read_dataset(path);
    if (data.target != want)
        throw kdx::ConfigError("'" + path + "' must provide a '" + need +
                               "' column");
    return data;
}

std::vector<std::string> feature_header(Index d) {
    std::vector<std::string> header;
    for (Index j = 0; j < d; ++j)
        header.push_back("x" + std::to_string(j + 1));
    return header;
}

void require_2d(const Matrix& points, const std::string& what) {
    if (points.cols() != 2)
        throw kdx::ConfigError(what + " needs 2-d points, got dimension " +
                               std::to_string(points.cols()));
}

// Arrow scale so the longest arrow spans about a quarter of the bounding box.
double arrow_scale(const Matrix& points, const Matrix& vectors) {
    const double dx = points.col(0).maxCoeff() - points.col(0).minCoeff();
    const double dy = points.col(1).maxCoeff() - points.col(1).minCoeff();
    const double diag = std::max(1e-12, std::hypot(dx, dy));
    double vmax = 0.0;
    for (Index i = 0; i < vectors.rows(); ++i)
        vmax = std::max(vmax, vectors.row(i).norm());
    return vmax > 0.0 ? 0.25 * diag / vmax : 1.0;
}

void write_field_svg(const std::string& path, const Matrix& points,
                     const Matrix& vectors) {
    require_2d(points, "--svg");
    kdx::SvgFigure fig;
    fig.add_scatter(points, "#3b6fb6", 2.5);
    fig.add_arrows(points, vectors, arrow_scale(points, vectors));
    fig.write(path);
}

void write_heat_svg(const std::string& path, const Matrix& points,
                    const Vector& values) {
    require_2d(points, "--svg");
    kdx::SvgFigure fig;
    fig.add_heat_scatter(points, values, 4.0);
    fig.write(path);
}

// Report the per-feature and per-point sensitivity summaries on stdout and
// optionally append them to the field table.
void print_feature_sensitivity(const kdx::DerivField& field) {
    const Vector s = kdx::feature_sensitivity(field);
    for (Index j = 0; j < s.size(); ++j)
        std::cout << "s" << (j + 1) << " " << kdx::format_g8(s[j]) << "\n";
}

// ---------------------------------------------------------------------------
// hsic block loading: either two files or one file split by column count

struct HsicInputFlags {
    std::string x_path;
    std::string y_path;
    std::string data_path;
    int split = 1;
};

void add_hsic_inputs(CLI::App* cmd, HsicInputFlags& in) {
    cmd->add_option("--x", in.x_path, "csv with the X block (x1..xd)");
    cmd->add_option("--y", in.y_path, "csv with the Y block (x1..xd)");
    cmd->add_option("--data", in.data_path,
                    "single csv carrying both blocks side by side");
    cmd->add_option("--split", in.split,
                    "first --split columns of --data form the X block");
}

std::pair<Matrix, Matrix> load_blocks(const HsicInputFlags& in) {
    if (!in.data_path.empty()) {
        const Matrix all = load_features(in.data_path);
        if (in.split < 1 || in.split >= all.cols())
            throw kdx::ConfigError("--split must lie in [1, d-1]");
        return {all.leftCols(in.split), all.rightCols(all.cols() - in.split)};
    }
    if (in.x_path.empty() || in.y_path.empty())
        throw kdx::ConfigError("hsic needs --x and --y (or --data/--split)");
    return {load_features(in.x_path), load_features(in.y_path)};
}

struct HsicKernelFlags {
    double gamma_x = -1.0;  // < 0: median heuristic
    double gamma_y = -1.0;
    std::string kernel_x_json;
    std::string kernel_y_json;
};

void add_hsic_kernels(CLI::App* cmd, HsicKernelFlags& kf) {
    cmd->add_option("--gamma-x", kf.gamma_x,
                    "rbf gamma for the X block (default: median heuristic)");
    cmd->add_option("--gamma-y", kf.gamma_y,
                    "rbf gamma for the Y block (default: median heuristic)");
    cmd->add_option("--kernel-x-json", kf.kernel_x_json,
                    "kernel spec JSON for the X block");
    cmd->add_option("--kernel-y-json", kf.kernel_y_json,
                    "kernel spec JSON for the Y block");
}

kdx::HsicConfig build_hsic_config(const HsicKernelFlags& kf) {
    kdx::HsicConfig cfg;
    if (!kf.kernel_x_json.empty())
        cfg.kernel_x = KernelSpec::from_json(load_json(kf.kernel_x_json));
    else if (kf.gamma_x > 0.0)
        cfg.kernel_x = KernelSpec::rbf(kf.gamma_x);
    if (!kf.kernel_y_json.empty())
        cfg.kernel_y = KernelSpec::from_json(load_json(kf.kernel_y_json));
    else if (kf.gamma_y > 0.0)
        cfg.kernel_y = KernelSpec::rbf(kf.gamma_y);
    return cfg;
}

kdx::HsicGradRoute parse_route(const std::string& name) {
    if (name == "auto") return kdx::HsicGradRoute::Auto;
    if (name == "general") return kdx::HsicGradRoute::General;
    if (name == "rbf") return kdx::HsicGradRoute::RbfHadamard;
    throw kdx::ConfigError("--route must be auto|general|rbf");
}

// ---------------------------------------------------------------------------
// command wiring

struct GenArgs {
    std::string name;
    int n = 100;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string svg;
};

void run_gen(const GenArgs& a) {
    kdx::ToySpec spec;
    spec.name = a.name;
    spec.n = a.n;
    spec.noise = a.noise;
    spec.seed = a.seed;
    const kdx::ToyData data = kdx::generate_toy(spec);

    Dataset out;
    out.X = data.X;
    out.y = data.y;
    if (data.y.size() == 0)
        out.target = Dataset::Target::None;
    else
        out.target = data.classification ? Dataset::Target::Label
                                         : Dataset::Target::Y;
    kdx::write_dataset(a.out, out);
    std::cout << "wrote " << a.out << " (" << data.X.rows() << " rows)\n";

    if (a.svg.empty()) return;
    kdx::SvgFigure fig;
    if (data.classification) {
        require_2d(data.X, "--svg");
        std::vector<Index> pos, neg;
        for (Index i = 0; i < data.X.rows(); ++i)
            (data.y[i] > 0 ? pos : neg).push_back(i);
        auto take = [&](const std::vector<Index>& idx) {
            Matrix m(static_cast<Index>(idx.size()), 2);
            for (Index r = 0; r < m.rows(); ++r)
                m.row(r) = data.X.row(idx[static_cast<std::size_t>(r)]);
            return m;
        };
        if (!pos.empty()) fig.add_scatter(take(pos), "#c43a3a", 3.0);
        if (!neg.empty()) fig.add_scatter(take(neg), "#3b6fb6", 3.0);
    } else if (data.y.size() > 0 && data.X.cols() == 1) {
        Matrix pts(data.X.rows(), 2);
        pts.col(0) = data.X.col(0);
        pts.col(1) = data.y;
        fig.add_scatter(pts, "#3b6fb6", 3.0);
    } else if (data.y.size() > 0) {
        require_2d(data.X, "--svg");
        fig.add_heat_scatter(data.X, data.y, 3.0);
    } else {
        require_2d(data.X, "--svg");
        fig.add_scatter(data.X, "#3b6fb6", 3.0);
    }
    fig.write(a.svg);
}

void setup_gen(CLI::App& app) {
    auto args = std::make_shared<GenArgs>();
    CLI::App* cmd = app.add_subcommand("gen", "generate a toy dataset");
    cmd->add_option("--name", args->name, "dataset name")->required();
    cmd->add_option("--n", args->n, "sample count");
    cmd->add_option("--noise", args->noise, "noise level");
    cmd->add_option("--seed", args->seed, "random seed");
    cmd->add_option("--out", args->out, "output csv")->required();
    cmd->add_option("--svg", args->svg, "optional scatter figure");
    cmd->callback([args] { run_gen(*args); });
}

void setup_kernel(CLI::App& app) {
    CLI::App* kernel = app.add_subcommand("kernel", "kernel evaluations");
    kernel->require_subcommand(1);

    struct EvalArgs {
        KernelFlags kf;
        std::string x, y;
    };
    auto eval_args = std::make_shared<EvalArgs>();
    CLI::App* eval = kernel->add_subcommand("eval", "evaluate k(x, y)");
    add_kernel_flags(eval, eval_args->kf);
    eval->add_option("--x", eval_args->x, "comma-separated point")->required();
    eval->add_option("--y", eval_args->y, "comma-separated point")->required();
    eval->callback([eval_args] {
        const KernelSpec spec = build_kernel(eval_args->kf);
        const Vector x = parse_numbers(eval_args->x, "--x");
        const Vector y = parse_numbers(eval_args->y, "--y");
        std::cout << kdx::format_g8(kdx::kernel_eval(spec, x, y)) << "\n";
    });

    auto grad_args = std::make_shared<EvalArgs>();
    CLI::App* grad = kernel->add_subcommand("grad", "gradient of k in x");
    add_kernel_flags(grad, grad_args->kf);
    grad->add_option("--x", grad_args->x, "comma-separated point")->required();
    grad->add_option("--y", grad_args->y, "comma-separated point")->required();
    grad->callback([grad_args] {
        const KernelSpec spec = build_kernel(grad_args->kf);
        const Vector x = parse_numbers(grad_args->x, "--x");
        const Vector y = parse_numbers(grad_args->y, "--y");
        const Vector g = kdx::kernel_grad_x(spec, x, y);
        for (Index j = 0; j < g.size(); ++j)
            std::cout << (j ? " " : "") << kdx::format_g8(g[j]);
        std::cout << "\n";
    });

    struct GramArgs {
        KernelFlags kf;
        std::string data, out;
        int threads = 0;
    };
    auto gram_args = std::make_shared<GramArgs>();
    CLI::App* gram = kernel->add_subcommand("gram", "Gram matrix of a dataset");
    add_kernel_flags(gram, gram_args->kf);
    gram->add_option("--data", gram_args->data, "input csv")->required();
    gram->add_option("--out", gram_args->out, "output csv")->required();
    gram->add_option("--threads", gram_args->threads, "worker threads");
    gram->callback([gram_args] {
        const KernelSpec spec = build_kernel(gram_args->kf);
        const Matrix x = load_features(gram_args->data);
        const Matrix k =
            kdx::gram(spec, x, resolve_threads(gram_args->threads));
        std::vector<std::string> header;
        for (Index j = 0; j < k.cols(); ++j)
            header.push_back("k" + std::to_string(j + 1));
        kdx::write_table(gram_args->out, header, k);
    });
}

void setup_gpr(CLI::App& app) {
    CLI::App* gpr = app.add_subcommand("gpr", "Gaussian process regression");
    gpr->require_subcommand(1);

    struct FitArgs {
        KernelFlags kf;
        std::string data, out;
        double noise_var = 0.0;
        double jitter = -1.0;
    };
    auto fit_args = std::make_shared<FitArgs>();
    CLI::App* fit = gpr->add_subcommand("fit", "fit a model");
    add_kernel_flags(fit, fit_args->kf);
    fit->add_option("--data", fit_args->data, "training csv (x1..xd,y)")
        ->required();
    fit->add_option("--noise-var", fit_args->noise_var, "noise variance");
    fit->add_option("--jitter", fit_args->jitter,
                    "explicit Cholesky jitter (<0: automatic)");
    fit->add_option("--out", fit_args->out, "model JSON path")->required();
    fit->callback([fit_args] {
        const Dataset data =
            load_labeled(fit_args->data, Dataset::Target::Y, "y");
        const auto model =
            kdx::GprModel::fit(data.X, data.y, build_kernel(fit_args->kf),
                               fit_args->noise_var, fit_args->jitter);
        save_json(fit_args->out, model.to_json());
    });

    struct PredictArgs {
        std::string model, data, out;
        bool with_var = false;
    };
    auto pred_args = std::make_shared<PredictArgs>();
    CLI::App* predict = gpr->add_subcommand("predict", "predictive mean");
    predict->add_option("--model", pred_args->model, "model JSON")->required();
    predict->add_option("--data", pred_args->data, "query csv")->required();
    predict->add_option("--out", pred_args->out, "output csv")->required();
    predict->add_flag("--var", pred_args->with_var,
                      "append the predictive variance");
    predict->callback([pred_args] {
        const auto model = kdx::GprModel::from_json(load_json(pred_args->model));
        const Matrix x = load_features(pred_args->data);
        const Vector mean = model.predict_mean(x);

        auto header = feature_header(x.cols());
        header.push_back("mean");
        Matrix out(x.rows(), x.cols() + (pred_args->with_var ? 2 : 1));
        out.leftCols(x.cols()) = x;
        out.col(x.cols()) = mean;
        if (pred_args->with_var) {
            header.push_back("var");
            for (Index i = 0; i < x.rows(); ++i)
                out(i, x.cols() + 1) =
                    model.predict_var(Vector(x.row(i).transpose()));
        }
        kdx::write_table(pred_args->out, header, out);
    });

    struct SensArgs {
        std::string model, data, out, svg;
    };
    auto sens_args = std::make_shared<SensArgs>();
    CLI::App* sens = gpr->add_subcommand("sens", "mean-gradient sensitivity");
    sens->add_option("--model", sens_args->model, "model JSON")->required();
    sens->add_option("--data", sens_args->data, "query csv")->required();
    sens->add_option("--out", sens_args->out, "field csv")->required();
    sens->add_option("--svg", sens_args->svg, "optional arrow figure");
    sens->callback([sens_args] {
        const auto model = kdx::GprModel::from_json(load_json(sens_args->model));
        const Matrix x = load_features(sens_args->data);
        const kdx::DerivField field = model.mean_gradient_field(x);
        const Vector q = kdx::point_sensitivity(field);

        auto header = feature_header(x.cols());
        for (Index j = 0; j < x.cols(); ++j)
            header.push_back("g" + std::to_string(j + 1));
        header.push_back("q");
        Matrix out(x.rows(), 2 * x.cols() + 1);
        out.leftCols(x.cols()) = x;
        out.middleCols(x.cols(), x.cols()) = field.values;
        out.col(2 * x.cols()) = q;
        kdx::write_table(sens_args->out, header, out);
        print_feature_sensitivity(field);
        if (!sens_args->svg.empty())
            write_field_svg(sens_args->svg, x, field.values);
    });

    struct NormArgs {
        std::string model;
    };
    auto norm_args = std::make_shared<NormArgs>();
    CLI::App* norms = gpr->add_subcommand("norms", "regularizer norms");
    norms->add_option("--model", norm_args->model, "model JSON")->required();
    norms->callback([norm_args] {
        const auto model = kdx::GprModel::from_json(load_json(norm_args->model));
        const auto n = model.regularizer_norms();
        std::cout << "h_norm " << kdx::format_g8(n.h_norm) << "\n"
                  << "l2_norm " << kdx::format_g8(n.l2_norm) << "\n"
                  << "grad_norm " << kdx::format_g8(n.grad_norm) << "\n"
                  << "lap_norm " << kdx::format_g8(n.lap_norm) << "\n";
    });
}

void setup_svm(CLI::App& app) {
    CLI::App* svm = app.add_subcommand("svm", "support vector classification");
    svm->require_subcommand(1);

    struct TrainArgs {
        KernelFlags kf;
        std::string data, out;
        kdx::SvmTrainOptions opts;
    };
    auto train_args = std::make_shared<TrainArgs>();
    CLI::App* train = svm->add_subcommand("train", "train a classifier");
    add_kernel_flags(train, train_args->kf);
    train->add_option("--data", train_args->data, "training csv (x1..xd,label)")
        ->required();
    train->add_option("--c", train_args->opts.c, "box constraint");
    train->add_option("--tol", train_args->opts.tol, "KKT tolerance");
    train->add_option("--max-passes", train_args->opts.max_passes,
                      "cap on accepted pair updates (-1: 100n)");
    train->add_option("--seed", train_args->opts.seed, "pair-selection seed");
    train->add_option("--out", train_args->out, "model JSON path")->required();
    train->callback([train_args] {
        const Dataset data =
            load_labeled(train_args->data, Dataset::Target::Label, "label");
        const auto model = kdx::SvmModel::train(
            data.X, data.y, build_kernel(train_args->kf), train_args->opts);
        save_json(train_args->out, model.to_json());
        std::cout << "support_vectors " << model.support_vectors().rows()
                  << "\n"
                  << "converged " << (model.converged() ? "yes" : "no") << "\n";
    });

    struct PredictArgs {
        std::string model, data, out;
    };
    auto pred_args = std::make_shared<PredictArgs>();
    CLI::App* predict = svm->add_subcommand("predict", "decision values");
    predict->add_option("--model", pred_args->model, "model JSON")->required();
    predict->add_option("--data", pred_args->data, "query csv")->required();
    predict->add_option("--out", pred_args->out, "output csv")->required();
    predict->callback([pred_args] {
        const auto model = kdx::SvmModel::from_json(load_json(pred_args->model));
        const Matrix x = load_features(pred_args->data);
        const Vector f = model.decision(x);

        auto header = feature_header(x.cols());
        header.push_back("decision");
        header.push_back("label");
        Matrix out(x.rows(), x.cols() + 2);
        out.leftCols(x.cols()) = x;
        out.col(x.cols()) = f;
        for (Index i = 0; i < x.rows(); ++i)
            out(i, x.cols() + 1) = f[i] >= 0.0 ? 1.0 : -1.0;
        kdx::write_table(pred_args->out, header, out);
    });

    struct SensArgs {
        std::string model, data, out, svg;
    };
    auto sens_args = std::make_shared<SensArgs>();
    CLI::App* sens = svm->add_subcommand("sens", "smooth decision gradients");
    sens->add_option("--model", sens_args->model, "model JSON")->required();
    sens->add_option("--data", sens_args->data, "query csv")->required();
    sens->add_option("--out", sens_args->out, "field csv")->required();
    sens->add_option("--svg", sens_args->svg, "optional arrow figure");
    sens->callback([sens_args] {
        const auto model = kdx::SvmModel::from_json(load_json(sens_args->model));
        const Matrix x = load_features(sens_args->data);
        const kdx::DerivField field = model.smooth_decision_field(x);
        const Vector q = kdx::point_sensitivity(field);

        auto header = feature_header(x.cols());
        for (Index j = 0; j < x.cols(); ++j)
            header.push_back("g" + std::to_string(j + 1));
        header.push_back("mask");
        header.push_back("q");
        Matrix out(x.rows(), 2 * x.cols() + 2);
        out.leftCols(x.cols()) = x;
        out.middleCols(x.cols(), x.cols()) = field.values;
        for (Index i = 0; i < x.rows(); ++i)
            out(i, 2 * x.cols()) =
                model.smooth_decision_gradient(Vector(x.row(i).transpose()))
                    .mask_term;
        out.col(2 * x.cols() + 1) = q;
        kdx::write_table(sens_args->out, header, out);
        print_feature_sensitivity(field);
        if (!sens_args->svg.empty())
            write_field_svg(sens_args->svg, x, field.values);
    });
}

void setup_density(CLI::App& app) {
    CLI::App* density = app.add_subcommand("density", "kernel density models");
    density->require_subcommand(1);

    struct FitArgs {
        KernelFlags kf;
        std::string data, out;
        std::string mode = "parzen";
        Index rank = 0;
    };
    auto fit_args = std::make_shared<FitArgs>();
    CLI::App* fit = density->add_subcommand("fit", "fit a density model");
    add_kernel_flags(fit, fit_args->kf);
    fit->add_option("--data", fit_args->data, "sample csv")->required();
    fit->add_option("--mode", fit_args->mode, "parzen|keca|entropy_keca");
    fit->add_option("--rank", fit_args->rank, "spectral rank (keca modes)");
    fit->add_option("--out", fit_args->out, "model JSON path")->required();
    fit->callback([fit_args] {
        const Matrix x = load_features(fit_args->data);
        const auto model = kdx::DensityModel::fit(
            x, build_kernel(fit_args->kf),
            kdx::density_mode_from_name(fit_args->mode), fit_args->rank);
        save_json(fit_args->out, model.to_json());
    });

    struct EvalArgs {
        std::string model, data, out;
        bool with_grad = false;
    };
    auto eval_args = std::make_shared<EvalArgs>();
    CLI::App* eval = density->add_subcommand("eval", "evaluate the density");
    eval->add_option("--model", eval_args->model, "model JSON")->required();
    eval->add_option("--data", eval_args->data, "query csv")->required();
    eval->add_option("--out", eval_args->out, "output csv")->required();
    eval->add_flag("--grad", eval_args->with_grad, "append gradient columns");
    eval->callback([eval_args] {
        const auto model =
            kdx::DensityModel::from_json(load_json(eval_args->model));
        const Matrix x = load_features(eval_args->data);

        auto header = feature_header(x.cols());
        header.push_back("density");
        const Index gcols = eval_args->with_grad ? x.cols() : 0;
        for (Index j = 0; j < gcols; ++j)
            header.push_back("g" + std::to_string(j + 1));
        Matrix out(x.rows(), x.cols() + 1 + gcols);
        out.leftCols(x.cols()) = x;
        for (Index i = 0; i < x.rows(); ++i) {
            const Vector p = x.row(i).transpose();
            out(i, x.cols()) = model.density_at(p);
            if (gcols > 0)
                out.row(i).segment(x.cols() + 1, gcols) =
                    model.density_gradient(p).transpose();
        }
        kdx::write_table(eval_args->out, header, out);
    });

    struct RidgeArgs {
        std::string model, data, out, svg;
        kdx::RidgeOptions opts;
    };
    auto ridge_args = std::make_shared<RidgeArgs>();
    CLI::App* ridge = density->add_subcommand("ridge", "density-ridge scores");
    ridge->add_option("--model", ridge_args->model, "model JSON")->required();
    ridge->add_option("--data", ridge_args->data, "query csv")->required();
    ridge->add_option("--r-ridge", ridge_args->opts.r_ridge, "ridge dimension");
    ridge->add_option("--quantile", ridge_args->opts.quantile,
                      "selection quantile");
    ridge->add_option("--tol", ridge_args->opts.tol,
                      "absolute score threshold (overrides --quantile)");
    ridge->add_flag("--top-subspace", ridge_args->opts.top_subspace,
                    "project onto the top-r eigenvectors instead");
    ridge->add_option("--out", ridge_args->out, "output csv")->required();
    ridge->add_option("--svg", ridge_args->svg, "optional heat figure");
    ridge->callback([ridge_args] {
        const auto model =
            kdx::DensityModel::from_json(load_json(ridge_args->model));
        const Matrix x = load_features(ridge_args->data);
        const auto res = kdx::ridge_scores(model, x, ridge_args->opts);

        auto header = feature_header(x.cols());
        header.push_back("score");
        header.push_back("selected");
        Matrix out(x.rows(), x.cols() + 2);
        out.leftCols(x.cols()) = x;
        out.col(x.cols()) = res.scores;
        out.col(x.cols() + 1).setZero();
        for (int idx : res.selected) out(idx, x.cols() + 1) = 1.0;
        kdx::write_table(ridge_args->out, header, out);
        std::cout << "threshold " << kdx::format_g8(res.threshold) << "\n"
                  << "selected " << res.selected.size() << " of " << x.rows()
                  << "\n";
        if (!ridge_args->svg.empty())
            write_heat_svg(ridge_args->svg, x, res.scores);
    });
}

void setup_hsic(CLI::App& app) {
    CLI::App* hsic = app.add_subcommand("hsic", "dependence analysis");
    hsic->require_subcommand(1);

    struct ValueArgs {
        HsicInputFlags in;
        HsicKernelFlags kf;
    };
    auto value_args = std::make_shared<ValueArgs>();
    CLI::App* value = hsic->add_subcommand("value", "dependence value");
    add_hsic_inputs(value, value_args->in);
    add_hsic_kernels(value, value_args->kf);
    value->callback([value_args] {
        const auto [x, y] = load_blocks(value_args->in);
        std::cout << kdx::format_g8(
                         kdx::hsic_value(x, y, build_hsic_config(value_args->kf)))
                  << "\n";
    });

    struct GradArgs {
        HsicInputFlags in;
        HsicKernelFlags kf;
        std::string route = "auto";
        std::string out, svg;
    };
    auto grad_args = std::make_shared<GradArgs>();
    CLI::App* grad = hsic->add_subcommand("grad", "per-sample gradient field");
    add_hsic_inputs(grad, grad_args->in);
    add_hsic_kernels(grad, grad_args->kf);
    grad->add_option("--route", grad_args->route, "auto|general|rbf");
    grad->add_option("--out", grad_args->out, "field csv")->required();
    grad->add_option("--svg", grad_args->svg,
                     "optional arrow figure over the X block");
    grad->callback([grad_args] {
        const auto [x, y] = load_blocks(grad_args->in);
        const auto field =
            kdx::hsic_gradients(x, y, build_hsic_config(grad_args->kf),
                                parse_route(grad_args->route));

        std::vector<std::string> header;
        for (Index j = 0; j < x.cols(); ++j)
            header.push_back("gx" + std::to_string(j + 1));
        for (Index j = 0; j < y.cols(); ++j)
            header.push_back("gy" + std::to_string(j + 1));
        header.push_back("mag");
        Matrix out(x.rows(), x.cols() + y.cols() + 1);
        out.leftCols(x.cols()) = field.grad_x;
        out.middleCols(x.cols(), y.cols()) = field.grad_y;
        out.col(x.cols() + y.cols()) = field.magnitude;
        kdx::write_table(grad_args->out, header, out);
        if (!grad_args->svg.empty())
            write_field_svg(grad_args->svg, x, field.grad_x);
    });

    struct PvalueArgs {
        HsicInputFlags in;
        HsicKernelFlags kf;
        int n_perm = 199;
        std::uint64_t seed = 0;
        int threads = 0;
    };
    auto pvalue_args = std::make_shared<PvalueArgs>();
    CLI::App* pvalue = hsic->add_subcommand("pvalue", "permutation test");
    add_hsic_inputs(pvalue, pvalue_args->in);
    add_hsic_kernels(pvalue, pvalue_args->kf);
    pvalue->add_option("--n-perm", pvalue_args->n_perm, "permutations (>= 19)");
    pvalue->add_option("--seed", pvalue_args->seed, "permutation seed");
    pvalue->add_option("--threads", pvalue_args->threads, "worker threads");
    pvalue->callback([pvalue_args] {
        const auto [x, y] = load_blocks(pvalue_args->in);
        const auto cfg = build_hsic_config(pvalue_args->kf);
        std::cout << "hsic " << kdx::format_g8(kdx::hsic_value(x, y, cfg))
                  << "\n"
                  << "p_value "
                  << kdx::format_g8(kdx::hsic_permutation_pvalue(
                         x, y, cfg, pvalue_args->n_perm, pvalue_args->seed,
                         resolve_threads(pvalue_args->threads)))
                  << "\n";
    });

    struct UnfoldArgs {
        HsicInputFlags in;
        HsicKernelFlags kf;
        std::string direction = "max";
        kdx::UnfoldOptions opts;
        std::string out_x, out_y, trace, svg;
    };
    auto unfold_args = std::make_shared<UnfoldArgs>();
    CLI::App* unfold = hsic->add_subcommand("unfold", "gradient flow on hsic");
    add_hsic_inputs(unfold, unfold_args->in);
    add_hsic_kernels(unfold, unfold_args->kf);
    unfold->add_option("--direction", unfold_args->direction, "max|min");
    unfold->add_option("--iters", unfold_args->opts.iters, "iterations");
    unfold->add_option("--step", unfold_args->opts.step,
                       "base step (<0: 0.1/max|grad|)");
    unfold->add_option("--max-halvings", unfold_args->opts.max_halvings,
                       "backtracking halvings per iteration");
    unfold->add_option("--out-x", unfold_args->out_x, "final X csv")->required();
    unfold->add_option("--out-y", unfold_args->out_y, "final Y csv")->required();
    unfold->add_option("--trace", unfold_args->trace, "objective trace csv");
    unfold->add_option("--svg", unfold_args->svg,
                       "optional before/after scatter of the X block");
    unfold->callback([unfold_args] {
        const auto [x, y] = load_blocks(unfold_args->in);
        kdx::UnfoldOptions opts = unfold_args->opts;
        if (unfold_args->direction == "max")
            opts.direction = kdx::UnfoldDirection::Maximize;
        else if (unfold_args->direction == "min")
            opts.direction = kdx::UnfoldDirection::Minimize;
        else
            throw kdx::ConfigError("--direction must be max|min");
        const auto trace =
            kdx::hsic_unfold(x, y, build_hsic_config(unfold_args->kf), opts);

        kdx::write_table(unfold_args->out_x, feature_header(x.cols()),
                         trace.x_final);
        kdx::write_table(unfold_args->out_y, feature_header(y.cols()),
                         trace.y_final);
        if (!unfold_args->trace.empty()) {
            Matrix t(static_cast<Index>(trace.hsic.size()), 1);
            for (Index i = 0; i < t.rows(); ++i)
                t(i, 0) = trace.hsic[static_cast<std::size_t>(i)];
            kdx::write_table(unfold_args->trace, {"hsic"}, t);
        }
        std::cout << "initial " << kdx::format_g8(trace.hsic.front()) << "\n"
                  << "final " << kdx::format_g8(trace.hsic.back()) << "\n"
                  << "steps " << trace.hsic.size() - 1 << "\n"
                  << "stalled " << (trace.stalled ? "yes" : "no") << "\n";
        if (!unfold_args->svg.empty()) {
            require_2d(x, "--svg");
            kdx::SvgFigure fig;
            fig.add_scatter(x, "#b0b0b0", 2.5);
            fig.add_scatter(trace.x_final, "#c43a3a", 2.5);
            fig.write(unfold_args->svg);
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kdx: kernel methods with analytic input derivatives"};
    app.require_subcommand(1);
    setup_gen(app);
    setup_kernel(app);
    setup_gpr(app);
    setup_svm(app);
    setup_density(app);
    setup_hsic(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const kdx::CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const kdx::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const kdx::UnknownDataset& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const kdx::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
