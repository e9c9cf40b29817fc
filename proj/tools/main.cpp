// corrkit command-line frontend.
//
// Exit codes: 0 success, 1 runtime failure (bad file, failed estimate), 2 usage error.

#include "cli_io.hpp"

#include <corrkit/evalkit.hpp>
#include <corrkit/formats.hpp>
#include <corrkit/geometry.hpp>
#include <corrkit/matching.hpp>
#include <corrkit/visuals.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace corrkit;
using corrkit::cli::UsageError;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
    bool emit_visuals = false;
};

std::string fmt6(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string strip_ext(const std::string& path)
{
    fs::path p(path);
    return (p.parent_path() / p.stem()).string();
}

// Runs fn(i) for i in [0, n) on at most `threads` workers. Exceptions are
// the callee's business; results go into caller-owned slots by index.
template <typename Fn>
void run_pool(std::size_t n, int threads, Fn fn)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// convert

struct ConvertOpts {
    std::string mode, input, output, from, to, cams, depth_mode = "zlsm";
    double v_tol = 0.0;
};

int cmd_convert(const ConvertOpts& o, const Globals& g)
{
    double ratio = 0.0;
    if (o.mode == "flow2disp") {
        const auto flow = cli::load_flow(o.input, o.from);
        const auto disp = flow_to_disparity(flow, o.v_tol);
        cli::save_disparity(o.output, disp, o.to);
        ratio = disp.valid_ratio();
    } else if (o.mode == "disp2flow") {
        const auto flow = disparity_to_flow(cli::load_disparity(o.input, o.from));
        cli::save_flow(o.output, flow, o.to);
        ratio = flow.valid_ratio();
        if (g.emit_visuals) write_file(strip_ext(o.output) + ".color.png", encode_png(flow_to_color(flow)));
    } else if (o.mode == "flow2depth" || o.mode == "depth2flow") {
        if (o.cams.empty()) {
            throw UsageError("convert --mode " + o.mode + " needs --cams");
        }
        const auto [ref, tar] = cli::load_camera_pair(o.cams);
        if (o.mode == "flow2depth") {
            DepthMode dm = DepthMode::Zlsm;
            if (o.depth_mode == "zu") dm = DepthMode::Zu;
            else if (o.depth_mode == "zv") dm = DepthMode::Zv;
            const auto depth = flow_to_depth(cli::load_flow(o.input, o.from), ref, tar, dm);
            cli::save_depth(o.output, depth, o.to);
            ratio = depth.valid_ratio();
        } else {
            const auto flow = project_depth_to_flow(cli::load_depth(o.input, o.from), ref, tar);
            cli::save_flow(o.output, flow, o.to);
            ratio = flow.valid_ratio();
            if (g.emit_visuals) write_file(strip_ext(o.output) + ".color.png", encode_png(flow_to_color(flow)));
        }
    } else {
        throw UsageError("unknown conversion mode '" + o.mode + "'");
    }
    std::cout << "mode=" << o.mode << " output=" << o.output << " valid_ratio=" << fmt6(ratio) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// reorg

struct ReorgOpts {
    std::string root, out, layout;
    bool augment = false;
    int max_dy = 0;
};

struct ReorgRow {
    std::string sample, source, mode;
    double ratio = 0.0;
    std::string error;
};

ReorgRow reorg_one(const fs::path& dir, const std::string& name, const ReorgOpts& o, const Globals& g,
                   std::size_t index)
{
    ReorgRow row{name, "", "", 0.0, ""};
    auto pick = [&](std::initializer_list<const char*> names) -> fs::path {
        for (const char* n : names) {
            if (fs::is_regular_file(dir / n)) return dir / n;
        }
        throw FormatError("no recognized annotation file in " + dir.string(), 0);
    };
    std::optional<DisplacementField> flow;
    fs::path src;
    if (o.layout == "disparity") {
        src = pick({"disp.pfm", "disp.png"});
        flow = disparity_to_flow(cli::load_disparity(src.string()));
        row.mode = "disp2flow";
    } else if (o.layout == "depth") {
        src = pick({"depth.pfm"});
        const auto [ref, tar] = cli::load_camera_pair((dir / "cams.txt").string());
        flow = project_depth_to_flow(cli::load_depth(src.string()), ref, tar);
        row.mode = "depth2flow";
    } else {
        src = pick({"flow.flo", "flow.png"});
        flow = cli::load_flow(src.string());
        row.mode = "copy";
    }
    if (o.augment) {
        const auto spec = AugmentSpec::sample(g.seed + index, o.max_dy);
        flow = apply_augment(*flow, spec);
        row.mode += "+aug(dy=" + std::to_string(spec.vertical_jitter_dy)
                    + ",rot=" + std::to_string(spec.rotate_quarter_turns) + ")";
    }
    write_file((fs::path(o.out) / (name + ".flo")).string(), write_flo(*flow));
    row.source = (fs::path(name) / src.filename()).generic_string();
    row.ratio = flow->valid_ratio();
    return row;
}

int cmd_reorg(const ReorgOpts& o, const Globals& g)
{
    if (!fs::is_directory(o.root)) {
        throw UsageError("reorg: dataset root '" + o.root + "' is not a directory");
    }
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(o.root)) {
        if (e.is_directory()) names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    fs::create_directories(o.out);

    std::vector<ReorgRow> rows(names.size());
    run_pool(names.size(), g.threads, [&](std::size_t i) {
        try {
            rows[i] = reorg_one(fs::path(o.root) / names[i], names[i], o, g, i);
        } catch (const std::exception& e) {
            rows[i].sample = names[i];
            rows[i].error = e.what();
        }
    });

    std::string manifest = "sample\tsource\tmode\tvalid_ratio\n";
    std::size_t ok = 0;
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            std::cerr << "reorg: skipping " << r.sample << ": " << r.error << "\n";
            continue;
        }
        manifest += r.sample + ".flo\t" + r.source + "\t" + r.mode + "\t" + fmt6(r.ratio) + "\n";
        ++ok;
    }
    write_text_file((fs::path(o.out) / "manifest.tsv").string(), manifest);
    std::cout << "samples=" << names.size() << " converted=" << ok << "\n";
    return (!names.empty() && ok == 0) ? 1 : 0;
}

// ---------------------------------------------------------------------------
// match

struct MatchOpts {
    std::string left, right, output, proposals = "disparity";
    int max_disp = 64, radius = 4, window = 5;
};

int cmd_match(const MatchOpts& o, const Globals& g)
{
    const Image left = cli::load_image(o.left);
    const Image right = cli::load_image(o.right);
    if (left.width() != right.width() || left.height() != right.height()) {
        throw UsageError("match: images differ in size");
    }
    std::optional<ProposalSet> props;
    if (o.proposals == "disparity") props = ProposalSet::disparity_range(o.max_disp + 1);
    else if (o.proposals == "window") props = ProposalSet::window(o.radius);
    else if (o.proposals == "full2d") props = ProposalSet::full_2d(right.width(), right.height());
    else throw UsageError("unknown proposal set '" + o.proposals + "'");

    const auto result = census_match(left, right, *props, o.window);
    double ratio = 0.0;
    if (props->kind() == ProposalKind::DisparityRange && cli::format_of(o.output) != "flo") {
        const auto disp = argmax_disparity(result.volume);
        cli::save_disparity(o.output, disp);
        ratio = disp.valid_ratio();
    } else {
        cli::save_flow(o.output, result.field);
        ratio = result.field.valid_ratio();
    }
    if (g.emit_visuals) {
        const auto& vol = result.volume;
        const std::size_t depth = vol.depth();
        // a handful of evenly spaced proposal slices
        const std::size_t slices = std::min<std::size_t>(depth, 4);
        for (std::size_t s = 0; s < slices; ++s) {
            const std::size_t k = slices == 1 ? 0 : s * (depth - 1) / (slices - 1);
            std::vector<double> plane(static_cast<std::size_t>(vol.width()) * vol.height());
            for (int v = 0; v < vol.height(); ++v)
                for (int u = 0; u < vol.width(); ++u) plane[static_cast<std::size_t>(v) * vol.width() + u] = vol.score(u, v, k);
            const Offset f = vol.proposals()[k];
            write_file(strip_ext(o.output) + ".score_du" + std::to_string(f.du) + "_dv" + std::to_string(f.dv) + ".png",
                       encode_png(heatmap(vol.width(), vol.height(), plane, -1.0, 1.0)));
        }
        write_file(strip_ext(o.output) + ".color.png", encode_png(flow_to_color(result.field)));
    }
    std::cout << "proposals=" << props->size() << " output=" << o.output << " valid_ratio=" << fmt6(ratio) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// filter

struct FilterOpts {
    std::string fwd, bwd, conf_out, matches_out;
    double tau_c = 1.0, min_conf = 0.5;
    bool relative = false;
    int stride = 1;
};

int cmd_filter(const FilterOpts& o, const Globals&)
{
    if (!(o.tau_c >= 0.0)) throw UsageError("filter: --tau-c must be >= 0");
    const auto fwd = cli::load_flow(o.fwd);
    const auto bwd = cli::load_flow(o.bwd);
    const auto conf = cycle_consistency(fwd, bwd, {o.tau_c, o.relative});
    write_file(o.conf_out, encode_png(confidence_to_png(conf)));
    std::size_t n = 0;
    if (!o.matches_out.empty()) {
        const auto ms = extract_matches(fwd, conf, o.stride, bwd.width(), bwd.height(), o.min_conf);
        write_text_file(o.matches_out, format_matches(ms));
        n = ms.size();
    }
    std::cout << "confident_ratio=" << fmt6(conf.mean()) << " matches=" << n << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
    std::string est, gt, task, format = "table", output;
    std::vector<double> taus;
};

std::vector<MetricReport> eval_pair(const std::string& est, const std::string& gt, const EvalOpts& o)
{
    std::vector<MetricReport> out;
    auto check_dims = [](const PixelGrid& a, const PixelGrid& b) {
        if (a.width() != b.width() || a.height() != b.height()) {
            throw UsageError("eval: estimate " + std::to_string(a.width()) + "x" + std::to_string(a.height())
                             + " vs ground truth " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
        }
    };
    if (o.task == "flow") {
        const auto e = cli::load_flow(est), t = cli::load_flow(gt);
        check_dims(e, t);
        out.push_back(epe(e, t));
        for (double tau : o.taus.empty() ? std::vector<double>{1.0, 3.0} : o.taus) out.push_back(bad_tau(e, t, tau));
        out.push_back(d1_f1_all(e, t));
    } else if (o.task == "stereo") {
        const auto e = cli::load_disparity(est), t = cli::load_disparity(gt);
        check_dims(e, t);
        out.push_back(epe(e, t));
        for (double tau : o.taus.empty() ? std::vector<double>{1.0, 2.0, 3.0} : o.taus) out.push_back(bad_tau(e, t, tau));
        out.push_back(d1_f1_all(e, t));
    } else if (o.task == "depth") {
        const auto e = cli::load_depth(est), t = cli::load_depth(gt);
        check_dims(e, t);
        for (auto& r : depth_metrics(e, t)) out.push_back(r);
    } else if (o.task == "fmat") {
        out.push_back(maa_epipolar(parse_matches(read_text_file(gt)), parse_fundamental(read_text_file(est))));
    } else {
        throw UsageError("unknown eval task '" + o.task + "'");
    }
    return out;
}

int cmd_eval(const EvalOpts& o, const Globals& g)
{
    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<std::string> labels;
    if (fs::is_directory(o.est) != fs::is_directory(o.gt)) {
        throw UsageError("eval: --est and --gt must both be files or both be directories");
    }
    if (fs::is_directory(o.est)) {
        std::vector<std::string> names;
        for (const auto& e : fs::directory_iterator(o.est)) {
            if (e.is_regular_file() && fs::is_regular_file(fs::path(o.gt) / e.path().filename())) {
                names.push_back(e.path().filename().string());
            }
        }
        std::sort(names.begin(), names.end());
        for (const auto& n : names) {
            pairs.emplace_back((fs::path(o.est) / n).string(), (fs::path(o.gt) / n).string());
            labels.push_back(n);
        }
        if (pairs.empty()) throw UsageError("eval: no file names shared by --est and --gt");
    } else {
        pairs.emplace_back(o.est, o.gt);
        labels.emplace_back();
    }

    std::vector<std::vector<MetricReport>> results(pairs.size());
    std::vector<std::exception_ptr> errors(pairs.size());
    run_pool(pairs.size(), g.threads, [&](std::size_t i) {
        try {
            results[i] = eval_pair(pairs[i].first, pairs[i].second, o);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::string text;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!labels[i].empty()) text += (o.format == "kv" ? "# " : "== ") + labels[i] + "\n";
        text += o.format == "kv" ? format_metric_key_values(results[i]) : format_metric_table(results[i]);
    }
    if (o.output.empty()) std::cout << text;
    else write_text_file(o.output, text);
    return 0;
}

// ---------------------------------------------------------------------------
// fmat

struct FmatOpts {
    std::string matches, output, inliers_out;
    int iterations = 2000;
    double tau = 1.0;
};

int cmd_fmat(const FmatOpts& o, const Globals& g)
{
    const auto ms = parse_matches(read_text_file(o.matches));
    const auto est = estimate_fundamental(ms, {o.iterations, o.tau, g.seed});
    write_text_file(o.output, format_fundamental(est.F));
    if (!o.inliers_out.empty()) {
        std::vector<Match> inl;
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (est.inliers[i]) inl.push_back(ms[i]);
        write_text_file(o.inliers_out, format_matches(MatchSet(std::move(inl))));
    }
    std::cout << "matches=" << ms.size() << " inliers=" << est.inlier_count << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"corrkit: dense correspondence conversion, matching and evaluation"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    app.set_config("--config", "", "key=value file of option overrides ([subcommand] sections allowed)");

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads for reorg/eval")->check(CLI::Range(1, 256))->capture_default_str();
    app.add_flag("--emit-visuals", g.emit_visuals, "Write color/heatmap PNGs next to outputs");

    ConvertOpts co;
    auto* convert = app.add_subcommand("convert", "Convert between flow, disparity and depth annotations");
    convert->add_option("--mode", co.mode, "flow2disp | disp2flow | flow2depth | depth2flow")
        ->required()
        ->check(CLI::IsMember({"flow2disp", "disp2flow", "flow2depth", "depth2flow"}));
    convert->add_option("-i,--input", co.input)->required()->check(CLI::ExistingFile);
    convert->add_option("-o,--output", co.output)->required();
    convert->add_option("--from", co.from, "Input format hint (flo, png, pfm)");
    convert->add_option("--to", co.to, "Output format hint (flo, png, pfm)");
    convert->add_option("--cams", co.cams, "Camera file: reference then target")->check(CLI::ExistingFile);
    convert->add_option("--v-tol", co.v_tol, "Max |dv| accepted by flow2disp")->check(CLI::NonNegativeNumber);
    convert->add_option("--depth-mode", co.depth_mode)->check(CLI::IsMember({"zu", "zv", "zlsm"}));

    ReorgOpts ro;
    auto* reorg = app.add_subcommand("reorg", "Convert a dataset tree to .flo files plus manifest.tsv");
    reorg->add_option("--root", ro.root, "One sub-directory per sample")->required();
    reorg->add_option("-o,--out", ro.out)->required();
    reorg->add_option("--layout", ro.layout)->required()->check(CLI::IsMember({"disparity", "depth", "flow"}));
    reorg->add_flag("--augment", ro.augment, "Seeded vertical jitter + quarter-turn rotation per sample");
    reorg->add_option("--max-dy", ro.max_dy)->check(CLI::NonNegativeNumber);

    MatchOpts mo;
    auto* match = app.add_subcommand("match", "Census-descriptor matching of an image pair");
    match->add_option("--left", mo.left)->required()->check(CLI::ExistingFile);
    match->add_option("--right", mo.right)->required()->check(CLI::ExistingFile);
    match->add_option("-o,--output", mo.output, ".pfm/.png disparity or .flo field")->required();
    match->add_option("--proposals", mo.proposals)->check(CLI::IsMember({"disparity", "window", "full2d"}));
    match->add_option("--max-disp", mo.max_disp)->check(CLI::NonNegativeNumber);
    match->add_option("--radius", mo.radius)->check(CLI::NonNegativeNumber);
    match->add_option("--window", mo.window, "Census window (odd, >= 3)");

    FilterOpts fo;
    auto* filter = app.add_subcommand("filter", "Forward-backward consistency filtering");
    filter->add_option("--fwd", fo.fwd)->required()->check(CLI::ExistingFile);
    filter->add_option("--bwd", fo.bwd)->required()->check(CLI::ExistingFile);
    filter->add_option("--tau-c", fo.tau_c, "Cycle residual threshold, px");
    filter->add_flag("--relative", fo.relative, "Scale the threshold by max(1, |fwd|)");
    filter->add_option("-o,--conf", fo.conf_out, "Confidence PNG")->required();
    filter->add_option("--matches", fo.matches_out, "Match list output");
    filter->add_option("--stride", fo.stride)->check(CLI::PositiveNumber);
    filter->add_option("--min-conf", fo.min_conf);

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "Evaluate estimates against ground truth");
    eval->add_option("--est", eo.est, "File or directory")->required()->check(CLI::ExistingPath);
    eval->add_option("--gt", eo.gt, "File or directory")->required()->check(CLI::ExistingPath);
    eval->add_option("--task", eo.task)->required()->check(CLI::IsMember({"flow", "stereo", "depth", "fmat"}));
    eval->add_option("--tau", eo.taus, "Bad-tau thresholds");
    eval->add_option("--format", eo.format)->check(CLI::IsMember({"table", "kv"}));
    eval->add_option("-o,--output", eo.output);

    FmatOpts mo2;
    auto* fmat = app.add_subcommand("fmat", "Robust fundamental-matrix estimation from matches");
    fmat->add_option("--matches", mo2.matches)->required()->check(CLI::ExistingFile);
    fmat->add_option("-o,--output", mo2.output)->required();
    fmat->add_option("--inliers", mo2.inliers_out);
    fmat->add_option("--iterations", mo2.iterations)->check(CLI::PositiveNumber);
    fmat->add_option("--tau", mo2.tau, "Inlier Sampson distance, px")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*convert) return cmd_convert(co, g);
        if (*reorg) return cmd_reorg(ro, g);
        if (*match) return cmd_match(mo, g);
        if (*filter) return cmd_filter(fo, g);
        if (*eval) return cmd_eval(eo, g);
        if (*fmat) return cmd_fmat(mo2, g);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
