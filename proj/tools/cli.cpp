#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "crnet/checkpoint.hpp"
#include "crnet/color.hpp"
#include "crnet/csc.hpp"
#include "crnet/errors.hpp"
#include "crnet/image_io.hpp"
#include "crnet/inference.hpp"
#include "crnet/metrics.hpp"
#include "crnet/ops.hpp"
#include "crnet/training.hpp"

namespace crnet {

namespace fs = std::filesystem;

namespace {

ResizeOptions resize_options(const std::string& boundary) {
    ResizeOptions o;
    if (boundary == "replicate") o.boundary = Boundary::replicate;
    else if (boundary == "symmetric") o.boundary = Boundary::symmetric;
    else throw ConfigError("boundary must be replicate or symmetric");
    return o;
}

std::string format_db(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

void print_report(std::ostream& out, const MetricsReport& report, std::size_t shave_border) {
    out << "scale x" << report.scale << ", shave " << shave_border << "\n";
    out << std::left << std::setw(28) << "image" << std::right << std::setw(12) << "PSNR(dB)" << std::setw(10) << "SSIM"
        << "\n";
    for (const auto& s : report.images) {
        out << std::left << std::setw(28) << s.name << std::right << std::setw(12) << format_db(s.psnr)
            << std::setw(10) << std::fixed << std::setprecision(4) << s.ssim << "\n";
    }
    out << std::left << std::setw(28) << "mean" << std::right << std::setw(12) << format_db(report.mean_psnr())
        << std::setw(10) << std::fixed << std::setprecision(4) << report.mean_ssim() << "\n";
    out.unsetf(std::ios::floatfield);
}

void write_report_csv(const fs::path& path, const MetricsReport& report) {
    std::ofstream csv(path);
    if (!csv) throw IoError("cannot write " + path.string());
    csv << "image,scale,psnr,ssim\n" << std::setprecision(17);
    for (const auto& s : report.images) csv << s.name << "," << report.scale << "," << s.psnr << "," << s.ssim << "\n";
    csv << "mean," << report.scale << "," << report.mean_psnr() << "," << report.mean_ssim() << "\n";
}

std::vector<fs::path> require_images(const fs::path& dir) {
    auto files = list_images(dir);
    if (files.empty()) throw IoError("no png/pgm/ppm images in " + dir.string());
    return files;
}

// --- subcommands ------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string output_dir;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    std::stringstream text;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw IoError("cannot open config " + a.config);
        text << in.rdbuf() << "\n";
    }
    for (const auto& kv : a.overrides) text << kv << "\n";
    TrainConfig cfg = parse_train_config(text);
    if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;

    std::vector<Tensor4> images;
    if (cfg.synthetic_count > 0) {
        images = synthetic_images(cfg.synthetic_count, cfg.synthetic_size, cfg.synthetic_size, 3, cfg.seed);
    } else {
        if (cfg.data_dir.empty()) throw ConfigError("set data_dir or synthetic_count");
        for (const auto& p : require_images(cfg.data_dir)) images.push_back(read_image(p));
    }

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream c(cfg.output_dir / "config.txt");
        c << format_train_config(cfg);
    }
    Model model = make_model(cfg);
    out << model_kind_name(model.kind) << ": " << model.params.element_count() << " parameters, " << images.size()
        << " training images\n";

    std::ofstream loss_csv(cfg.output_dir / "loss.csv");
    loss_csv << "step,epoch,lr,loss\n" << std::setprecision(17);
    std::size_t last_step = 0;
    TrainHooks hooks;
    hooks.on_step = [&](const LossRecord& r) {
        loss_csv << r.step << "," << r.epoch << "," << r.lr << "," << r.loss << "\n";
        last_step = r.step;
    };
    double epoch_sum = 0.0;
    std::size_t epoch_count = 0;
    auto step_hook = hooks.on_step;
    hooks.on_step = [&, step_hook](const LossRecord& r) {
        step_hook(r);
        epoch_sum += r.loss;
        ++epoch_count;
    };
    hooks.on_epoch = [&](std::size_t epoch, const Model& m) {
        out << "epoch " << epoch << " mean loss " << (epoch_count ? epoch_sum / static_cast<double>(epoch_count) : 0.0)
            << "\n";
        epoch_sum = 0.0;
        epoch_count = 0;
        if (cfg.checkpoint_every && epoch % cfg.checkpoint_every == 0) {
            std::ostringstream name;
            name << "epoch_" << std::setw(4) << std::setfill('0') << epoch << ".ckpt";
            save_checkpoint(cfg.output_dir / name.str(), m, {cfg.seed, epoch, last_step});
        }
    };
    train(model, images, cfg, hooks);
    save_checkpoint(cfg.output_dir / "final.ckpt", model, {cfg.seed, cfg.epochs, last_step});
    out << "wrote " << (cfg.output_dir / "final.ckpt").string() << "\n";
    return 0;
}

struct InitArgs {
    std::string model = "crnet-a";
    std::string config;
    std::string output;
    std::uint64_t seed = 1;
    bool zero_residual = false;
};

int cmd_init(const InitArgs& a, std::ostream& out) {
    std::stringstream text;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw IoError("cannot open config " + a.config);
        text << in.rdbuf() << "\n";
    } else {
        text << "model = " << a.model << "\n";
    }
    const TrainConfig cfg = parse_train_config(text);
    Model model = make_model(cfg);
    InitOptions opts{a.zero_residual};
    model.params = model.kind == ModelKind::crnet_a ? init_crneta(model.a, a.seed, opts) : init_crnetb(model.b, a.seed, opts);
    save_checkpoint(a.output, model, {a.seed, 0, 0});
    out << "wrote " << a.output << " (" << model.params.element_count() << " parameters)\n";
    return 0;
}

struct SrArgs {
    std::string checkpoint, input, output, boundary = "replicate";
    std::size_t scale = 2;
    bool ensemble = false;
};

int cmd_sr(const SrArgs& a, std::ostream& out) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    SrOptions opts{a.ensemble, resize_options(a.boundary)};
    const Tensor4 sr = super_resolve(ck.model, read_image(a.input), a.scale, opts);
    write_image(a.output, sr);
    out << "wrote " << a.output << " (" << sr.height() << "x" << sr.width() << ")\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint, hr_dir, sr_dir, csv, boundary = "replicate";
    std::size_t scale = 2;
    bool ensemble = false;
    bool quantize = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    if (a.checkpoint.empty() == a.sr_dir.empty()) throw UsageError("give exactly one of --checkpoint or --sr-dir");
    const ResizeOptions ro = resize_options(a.boundary);
    MetricsReport report;
    report.scale = a.scale;
    std::optional<Checkpoint> ck;
    if (!a.checkpoint.empty()) ck = load_checkpoint(a.checkpoint);
    for (const auto& path : require_images(a.hr_dir)) {
        Tensor4 hr_y, sr_y;
        if (ck) {
            const Degraded d = degrade(read_image(path), a.scale, ro);
            Tensor4 sr = super_resolve(ck->model, d.lr, a.scale, SrOptions{a.ensemble, ro});
            if (a.quantize) sr = quantize_u8(sr);
            hr_y = luminance(d.hr);
            sr_y = luminance(sr);
        } else {
            const fs::path other = fs::path(a.sr_dir) / path.filename();
            hr_y = luminance(read_image(path));
            sr_y = luminance(read_image(other));
        }
        report.images.push_back({path.filename().string(), psnr(sr_y, hr_y, a.scale), ssim(sr_y, hr_y, a.scale)});
    }
    print_report(out, report, a.scale);
    if (!a.csv.empty()) write_report_csv(a.csv, report);
    return 0;
}

struct DegradeArgs {
    std::string input, output_dir, boundary = "replicate";
    std::size_t scale = 2;
};

int cmd_degrade(const DegradeArgs& a, std::ostream& out) {
    std::vector<fs::path> files = fs::is_directory(a.input) ? require_images(a.input) : std::vector<fs::path>{a.input};
    fs::create_directories(a.output_dir);
    const ResizeOptions ro = resize_options(a.boundary);
    for (const auto& p : files) {
        const Degraded d = degrade(read_image(p), a.scale, ro);
        const std::string stem = p.stem().string();
        const std::string ext = p.extension().string();
        const std::string tag = "_x" + std::to_string(a.scale);
        write_image(fs::path(a.output_dir) / (stem + "_hr" + tag + ext), d.hr);
        write_image(fs::path(a.output_dir) / (stem + "_lr" + tag + ext), clamp01(d.lr));
        write_image(fs::path(a.output_dir) / (stem + "_ilr" + tag + ext), clamp01(d.ilr));
        out << stem << ": hr " << d.hr.height() << "x" << d.hr.width() << ", lr " << d.lr.height() << "x"
            << d.lr.width() << "\n";
    }
    return 0;
}

struct CscArgs {
    std::string image, filters, trace, code;
    std::size_t random_filters = 0;
    std::size_t kernel = 3;
    std::uint64_t seed = 1;
    double lambda = 0.01;
    std::size_t iters = 100;
    double tol = 0.0;
    bool nonnegative = false;
};

int cmd_csc(const CscArgs& a, std::ostream& out) {
    Tensor4 y = luminance(read_image(a.image));
    Tensor4 w;
    if (!a.filters.empty()) {
        w = load_tensor(a.filters);
    } else if (a.random_filters > 0) {
        std::mt19937_64 rng(a.seed);
        std::normal_distribution<double> normal(0.0, 1.0 / static_cast<double>(a.kernel));
        w = Tensor4(Shape{a.random_filters, y.channels(), a.kernel, a.kernel});
        for (double& v : w.data()) v = normal(rng);
    } else {
        throw UsageError("give --filters or --random-filters");
    }
    const CscProblem p{std::move(y), FilterBank(std::move(w)), a.lambda, a.nonnegative};
    SolveOptions so;
    so.max_iters = a.iters;
    so.tol = a.tol;
    const SolveResult r = solve(p, so);
    if (!a.trace.empty()) {
        std::ofstream csv(a.trace);
        if (!csv) throw IoError("cannot write " + a.trace);
        csv << "iteration,objective\n" << std::setprecision(17);
        for (std::size_t k = 0; k < r.objective_trace.size(); ++k) csv << k + 1 << "," << r.objective_trace[k] << "\n";
    }
    if (!a.code.empty()) save_tensor(a.code, r.state.z);
    std::size_t nonzero = 0;
    for (double v : r.state.z.data()) nonzero += v != 0.0;
    out << std::setprecision(10) << "L " << r.L << ", iterations " << r.state.iteration << ", objective "
        << r.state.objective << ", nonzeros " << nonzero << "/" << r.state.z.size() << "\n";
    return 0;
}

struct GradArgs {
    std::string model = "both";
    std::uint64_t seed = 1;
    double tolerance = 1e-4;
};

int cmd_grad_check(const GradArgs& a, std::ostream& out) {
    std::vector<ModelKind> kinds;
    if (a.model == "both") kinds = {ModelKind::crnet_a, ModelKind::crnet_b};
    else kinds = {parse_model_kind(a.model)};
    bool all = true;
    for (ModelKind k : kinds) {
        TinyGradProblem tp;
        make_tiny_grad_problem(tp, k, a.seed);
        GradCheckOptions go;
        go.tolerance = a.tolerance;
        const GradCheckReport rep = grad_check(tp.graph, tp.inputs, tp.model.params, go);
        out << model_kind_name(k) << "\n";
        for (const auto& e : rep.entries) {
            out << "  " << std::left << std::setw(14) << e.name << std::right << std::setw(6) << e.elements
                << "  max rel err " << std::scientific << std::setprecision(3) << e.max_rel_error << "  "
                << (e.passed ? "ok" : "FAIL") << "\n";
            out.unsetf(std::ios::floatfield);
        }
        out << "  " << (rep.passed() ? "PASS" : "FAIL") << "\n";
        all = all && rep.passed();
    }
    return all ? 0 : 1;
}

struct BaselineArgs {
    std::string set_dir, csv, boundary = "replicate";
    std::size_t scale = 2;
    bool no_quantize = false;
};

int cmd_baseline(const BaselineArgs& a, std::ostream& out) {
    BaselineOptions bo;
    bo.resize = resize_options(a.boundary);
    bo.quantize = !a.no_quantize;
    MetricsReport report;
    report.scale = a.scale;
    for (const auto& path : require_images(a.set_dir)) {
        ImageScore s = bicubic_baseline(read_image(path), a.scale, bo);
        s.name = path.filename().string();
        report.images.push_back(s);
    }
    print_report(out, report, a.scale);
    if (!a.csv.empty()) write_report_csv(a.csv, report);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Convolutional sparse coding and CRNet super-resolution"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    auto scale_check = CLI::IsMember({std::size_t{2}, std::size_t{3}, std::size_t{4}});
    auto boundary_check = CLI::IsMember({"replicate", "symmetric"});

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train a network from a key=value config file");
    train_cmd->add_option("config", ta.config, "Config file")->check(CLI::ExistingFile);
    train_cmd->add_option("-s,--set", ta.overrides, "Extra key=value settings applied after the file");
    train_cmd->add_option("-o,--output-dir", ta.output_dir, "Directory for checkpoints and loss.csv");

    InitArgs ia;
    auto* init_cmd = app.add_subcommand("init", "Write a freshly initialised checkpoint");
    init_cmd->add_option("-m,--model", ia.model, "crnet-a or crnet-b")->check(CLI::IsMember({"crnet-a", "crnet-b", "a", "b"}));
    init_cmd->add_option("-c,--config", ia.config, "Config file giving the architecture")->check(CLI::ExistingFile);
    init_cmd->add_option("-o,--output", ia.output, "Checkpoint to write")->required();
    init_cmd->add_option("--seed", ia.seed, "Initialisation seed");
    init_cmd->add_flag("--zero-residual", ia.zero_residual, "Zero the last layer so the network starts as the identity on its skip path");

    SrArgs sa;
    auto* sr_cmd = app.add_subcommand("sr", "Super-resolve one LR image");
    sr_cmd->add_option("-c,--checkpoint", sa.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
    sr_cmd->add_option("-i,--input", sa.input, "LR image")->required()->check(CLI::ExistingFile);
    sr_cmd->add_option("-o,--output", sa.output, "Output image (.png/.pgm/.ppm)")->required();
    sr_cmd->add_option("--scale", sa.scale, "Upscaling factor")->required()->check(scale_check);
    sr_cmd->add_flag("--ensemble", sa.ensemble, "Average over the 8 flips/rotations");
    sr_cmd->add_option("--boundary", sa.boundary, "Bicubic border handling")->check(boundary_check);

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Y-channel PSNR/SSIM of a model (or of SR images) against HR images");
    eval_cmd->add_option("-c,--checkpoint", ea.checkpoint, "Checkpoint file")->check(CLI::ExistingFile);
    eval_cmd->add_option("--hr-dir", ea.hr_dir, "Directory of HR images")->required()->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--sr-dir", ea.sr_dir, "Directory of SR images matched to HR by file name")->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--scale", ea.scale, "Upscaling factor; also the border shave")->required()->check(scale_check);
    eval_cmd->add_option("--csv", ea.csv, "Write per-image metrics here");
    eval_cmd->add_flag("--ensemble", ea.ensemble, "Self-ensemble inference");
    eval_cmd->add_flag("--quantize", ea.quantize, "Round SR output to 8 bits before scoring");
    eval_cmd->add_option("--boundary", ea.boundary, "Bicubic border handling")->check(boundary_check);

    DegradeArgs da;
    auto* degrade_cmd = app.add_subcommand("degrade", "Write modcropped HR, bicubic LR and ILR images");
    degrade_cmd->add_option("-i,--input", da.input, "HR image or directory")->required()->check(CLI::ExistingPath);
    degrade_cmd->add_option("-o,--output-dir", da.output_dir, "Output directory")->required();
    degrade_cmd->add_option("--scale", da.scale, "Downscaling factor")->required()->check(scale_check);
    degrade_cmd->add_option("--boundary", da.boundary, "Bicubic border handling")->check(boundary_check);

    CscArgs ca;
    auto* csc_cmd = app.add_subcommand("csc-solve", "Solve a convolutional sparse coding problem with CISTA");
    csc_cmd->add_option("-i,--image", ca.image, "Signal image (RGB is reduced to Y)")->required()->check(CLI::ExistingFile);
    csc_cmd->add_option("-f,--filters", ca.filters, "Dictionary tensor file, m x c x s x s")->check(CLI::ExistingFile);
    csc_cmd->add_option("--random-filters", ca.random_filters, "Use m random Gaussian filters instead");
    csc_cmd->add_option("--kernel", ca.kernel, "Size of random filters")->check(CLI::PositiveNumber);
    csc_cmd->add_option("--seed", ca.seed, "Seed for random filters");
    csc_cmd->add_option("--lambda", ca.lambda, "l1 weight")->check(CLI::NonNegativeNumber);
    csc_cmd->add_option("--iters", ca.iters, "Iteration budget")->check(CLI::PositiveNumber);
    csc_cmd->add_option("--tol", ca.tol, "Relative objective change stopping threshold (0 = run all iterations)");
    csc_cmd->add_flag("--nonnegative", ca.nonnegative, "Constrain the code to be nonnegative");
    csc_cmd->add_option("--trace", ca.trace, "CSV of the objective per iteration");
    csc_cmd->add_option("--code", ca.code, "Tensor file for the final code z");

    GradArgs ga;
    auto* grad_cmd = app.add_subcommand("grad-check", "Finite-difference check of tiny networks");
    grad_cmd->add_option("-m,--model", ga.model, "crnet-a, crnet-b or both")->check(CLI::IsMember({"crnet-a", "crnet-b", "a", "b", "both"}));
    grad_cmd->add_option("--seed", ga.seed, "Seed for weights and data");
    grad_cmd->add_option("--tolerance", ga.tolerance, "Largest accepted relative error");

    BaselineArgs ba;
    auto* base_cmd = app.add_subcommand("baseline", "Bicubic-only Y-channel PSNR/SSIM on a directory of HR images");
    base_cmd->add_option("--set", ba.set_dir, "Directory of HR images")->required()->check(CLI::ExistingDirectory);
    base_cmd->add_option("--scale", ba.scale, "Scale factor; also the border shave")->required()->check(scale_check);
    base_cmd->add_option("--csv", ba.csv, "Write per-image metrics here");
    base_cmd->add_option("--boundary", ba.boundary, "Bicubic border handling")->check(boundary_check);
    base_cmd->add_flag("--no-quantize", ba.no_quantize, "Keep the HR luminance unquantised");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) return cmd_train(ta, out);
        if (*init_cmd) return cmd_init(ia, out);
        if (*sr_cmd) return cmd_sr(sa, out);
        if (*eval_cmd) return cmd_eval(ea, out);
        if (*degrade_cmd) return cmd_degrade(da, out);
        if (*csc_cmd) return cmd_csc(ca, out);
        if (*grad_cmd) return cmd_grad_check(ga, out);
        if (*base_cmd) return cmd_baseline(ba, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ChecksumError& e) {
        err << "checksum error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace crnet
