#include "reverb/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reverb/compound.hpp"
#include "reverb/config.hpp"
#include "reverb/kv.hpp"
#include "reverb/metrics.hpp"
#include "reverb/phantom.hpp"
#include "reverb/probseg.hpp"
#include "reverb/raster_io.hpp"
#include "reverb/transform.hpp"

namespace reverb::cli {

namespace {

namespace fs = std::filesystem;

// Pipeline hyperparameter flags shared by the subcommands that consume
// a PipelineConfig. Flags override the optional config file.
struct ConfigFlags {
    std::string config_path;
    PipelineConfig flags;

    struct Binding {
        CLI::Option* option;
        void (*apply)(PipelineConfig&, const PipelineConfig&);
    };
    std::vector<Binding> bindings;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "key-value config file (flags override it)");
        auto bind = [this](CLI::Option* opt, void (*apply)(PipelineConfig&, const PipelineConfig&)) {
            bindings.push_back({opt, apply});
        };
        bind(cmd.add_option("--ht", flags.ht, "horizontal clustering semi-axis")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.ht = f.ht; });
        bind(cmd.add_option("--vt", flags.vt, "vertical clustering semi-axis")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.vt = f.vt; });
        bind(cmd.add_option("--t-fp", flags.t_fp, "max needle-to-cluster distance")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.t_fp = f.t_fp; });
        bind(cmd.add_option("--alpha", flags.alpha, "exponential decay rate")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.alpha = f.alpha; });
        bind(cmd.add_option("--beta", flags.beta, "suppression sigmoid steepness")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.beta = f.beta; });
        bind(cmd.add_option("--vw", flags.vw, "suppression window half-height")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.vw = f.vw; });
        bind(cmd.add_option("--hw", flags.hw, "suppression window half-width")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.hw = f.hw; });
        bind(cmd.add_option("--epsilon", flags.epsilon, "division guard")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.epsilon = f.epsilon; });
        bind(cmd.add_option("--gamma", flags.gamma, "loss activity threshold")->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.gamma = f.gamma; });
        bind(cmd.add_option("--k-weight", flags.k_weight, "loss weight inside the label std")
                 ->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.k_weight = f.k_weight; });
        bind(cmd.add_option("--artifact-pos-thresh", flags.artifact_pos_thresh,
                            "artifact positivity threshold")
                 ->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) {
                 c.artifact_pos_thresh = f.artifact_pos_thresh;
             });
        bind(cmd.add_option("--needle-pos-thresh", flags.needle_pos_thresh,
                            "needle positivity threshold")
                 ->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) {
                 c.needle_pos_thresh = f.needle_pos_thresh;
             });
        bind(cmd.add_option("--t", flags.compound_t, "compounding confidence threshold")
                 ->capture_default_str(),
             [](PipelineConfig& c, const PipelineConfig& f) { c.compound_t = f.compound_t; });
        bind(cmd.add_flag("--literal-global-rule", flags.literal_global_needle_rule,
                          "cluster keep rule quantified over all needle pixels"),
             [](PipelineConfig& c, const PipelineConfig& f) {
                 c.literal_global_needle_rule = f.literal_global_needle_rule;
             });
        bind(cmd.add_flag("--scaled-std", flags.scaled_std_transform,
                          "rescale the hard std map instead of the plain ratio"),
             [](PipelineConfig& c, const PipelineConfig& f) {
                 c.scaled_std_transform = f.scaled_std_transform;
             });
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : read_config(config_path);
        for (const auto& b : bindings)
            if (b.option->count() > 0) b.apply(cfg, flags);
        validate(cfg);
        return cfg;
    }
};

Raster read_map_any(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".rf32") return read_raster_f32(path);
    return read_raster_u8(path);
}

void write_probmap(const ProbMap& map, const fs::path& dir, const std::string& stem) {
    write_raster_f32(map.mean, (dir / (stem + "_mean.rf32")).string());
    write_raster_f32(map.std, (dir / (stem + "_std.rf32")).string());
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, int n,
                 std::uint64_t seed, std::ostream& out) {
    const PhantomSpec spec = read_phantom_spec(spec_path);
    const auto names = write_phantom_batch(spec, seed, n, out_dir);
    out << "wrote " << names.size() << " sample(s) under " << out_dir << "\n";
    return 0;
}

int cmd_segment(const std::string& image_path, const std::string& out_dir, int samples,
                std::uint64_t seed, bool dump_stack, std::ostream& out) {
    const Raster image = read_raster_u8(image_path);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const BaselineSegmenter segmenter;

    if (samples < 2) {
        const auto result = segmenter.segment(image, seed);
        write_probmap(result.artifact, dir, "artifact");
        write_probmap(result.needle, dir, "needle");
    } else {
        const EnsembleResult ens = segment_ensemble(segmenter, image, samples, seed);
        write_probmap(ens.artifact, dir, "artifact");
        write_probmap(ens.needle, dir, "needle");
        const AleatoricResult unc = aleatoric_uncertainty(ens.artifact_stack);
        write_raster_f32(unc.trace, (dir / "uncertainty_trace.rf32").string());
        if (dump_stack) {
            KvEntries manifest;
            for (std::size_t t = 0; t < ens.artifact_stack.size(); ++t) {
                char name[48];
                std::snprintf(name, sizeof name, "stack_%03zu_artifact.rf32", t);
                write_raster_f32(ens.artifact_stack[t][0], (dir / name).string());
                manifest.emplace_back("sample", name);
            }
            write_kv_file(manifest, (dir / "stack_manifest.txt").string());
        }
    }
    out << "segmented " << image_path << " -> " << out_dir << "\n";
    return 0;
}

int cmd_transform(const std::string& image_path, const std::string& artifact_mean_path,
                  const std::string& artifact_std_path, const std::string& needle_mean_path,
                  const std::string& needle_std_path, const std::string& out_dir,
                  bool dump_stages, const PipelineConfig& cfg, std::ostream& out) {
    const Raster image = read_raster_u8(image_path);
    ProbMap artifact{read_raster_f32(artifact_mean_path), read_raster_f32(artifact_std_path)};
    ProbMap needle{read_raster_f32(needle_mean_path), read_raster_f32(needle_std_path)};

    const TransformStages stages = transform_stages(image, artifact, needle, cfg);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_probmap(stages.artifact_soft, dir, "artifact_soft");
    write_probmap(stages.needle_soft, dir, "needle_soft");
    if (dump_stages) {
        write_raster_f32(stages.y1, (dir / "y1.rf32").string());
        write_raster_f32(stages.y21, (dir / "y21.rf32").string());
        write_raster_f32(stages.y22, (dir / "y22.rf32").string());
        write_raster_f32(stages.y2, (dir / "y2.rf32").string());
        write_raster_f32(cluster_ids_as_raster(stages.clusters), (dir / "clusters.rf32").string());
    }
    out << "transformed " << image_path << " -> " << out_dir << "\n";
    return 0;
}

int cmd_metrics(const std::vector<std::string>& pred_dirs,
                const std::vector<std::string>& labels_dirs, const std::string& out_path,
                const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    if (pred_dirs.size() != labels_dirs.size()) {
        err << "error: metrics needs one --labels per --pred\n";
        return 1;
    }

    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < pred_dirs.size(); ++i) {
        const fs::path pred(pred_dirs[i]);
        const Raster artifact = read_raster_f32((pred / "artifact_soft_mean.rf32").string());
        const Raster needle = read_raster_f32((pred / "needle_soft_mean.rf32").string());
        const RegionLabels labels = read_labels_dir(labels_dirs[i]);
        reports.push_back(compute_metrics(artifact, needle, labels, cfg));
    }
    const MetricsReport final_report =
        reports.size() == 1 ? reports.front() : aggregate_reports(reports);
    if (!out_path.empty()) write_report(final_report, out_path);
    out << format_report_table(final_report);
    return 0;
}

int cmd_compound(const std::vector<std::string>& view_args, const std::string& out_path,
                 const std::string& source_path, double t, std::ostream& out, std::ostream& err) {
    std::vector<View> views;
    for (const auto& arg : view_args) {
        const auto colon = arg.find(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 >= arg.size()) {
            err << "error: --views expects IMAGE:ARTIFACT_MAP, got '" << arg << "'\n";
            return 1;
        }
        View v;
        v.image = read_map_any(arg.substr(0, colon));
        v.artifact_soft = read_map_any(arg.substr(colon + 1));
        views.push_back(std::move(v));
    }
    if (views.size() < 2) {
        err << "error: compound needs at least two --views\n";
        return 1;
    }
    const CompoundResult result = compound_many(views, t);
    write_raster_u8(result.image, out_path);
    if (!source_path.empty()) write_raster_f32(result.source, source_path);
    out << "compounded " << views.size() << " views -> " << out_path << "\n";
    return 0;
}

int cmd_loss(const std::string& pred_path, const std::string& label_mean_path,
             const std::string& label_std_path, const PipelineConfig& cfg, std::ostream& out) {
    const Raster pred = read_raster_f32(pred_path);
    const Raster label_mean = read_raster_f32(label_mean_path);
    const Raster label_std = read_raster_f32(label_std_path);
    const LossResult r = weighted_mse_loss(pred, label_mean, label_std,
                                           LossParams{cfg.gamma, cfg.k_weight});
    char buf[64];
    std::snprintf(buf, sizeof buf, "loss %.12g\n", r.loss);
    out << buf << "active_count " << r.active_count << "\n";
    return 0;
}

int cmd_prune(const std::string& labels_path, const std::string& uncertainty_path, int patch,
              double quantile, const std::string& out_path, std::ostream& out) {
    const Mask labels = read_mask_pgm(labels_path);
    const Raster uncertainty = read_raster_f32(uncertainty_path);
    const Mask pruned = prune_labels(labels, uncertainty, patch, quantile);
    write_mask_pgm(pruned, out_path);
    out << "kept " << pruned.count() << " of " << labels.count() << " labeled pixels -> "
        << out_path << "\n";
    return 0;
}

int cmd_pipeline(const std::string& image_path, const std::string& out_dir,
                 const std::string& labels_dir, int samples, std::uint64_t seed,
                 const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
    if (samples < 2) {
        err << "error: pipeline needs --samples >= 2\n";
        return 1;
    }
    const Raster image = read_raster_u8(image_path);
    const BaselineSegmenter segmenter;
    const EnsembleResult ens = segment_ensemble(segmenter, image, samples, seed);
    const TransformResult result = transform_full(image, ens.artifact, ens.needle, cfg);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_raster_f32(result.artifact_soft.mean, (dir / "artifact_soft.rf32").string());
    write_raster_f32(result.needle_soft.mean, (dir / "needle_soft.rf32").string());
    write_raster_f32(result.artifact_soft.std, (dir / "artifact_soft_std.rf32").string());
    write_raster_f32(result.needle_soft.std, (dir / "needle_soft_std.rf32").string());

    if (!labels_dir.empty()) {
        const RegionLabels labels = read_labels_dir(labels_dir);
        const MetricsReport report =
            compute_metrics(result.artifact_soft.mean, result.needle_soft.mean, labels, cfg);
        write_report(report, (dir / "metrics.txt").string());
        out << format_report_table(report);
    }
    out << "pipeline " << image_path << " -> " << out_dir << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"needle reverberation artifact soft-label toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "generate synthetic phantom samples");
    std::string sim_spec, sim_out;
    int sim_n = 1;
    std::uint64_t sim_seed = 1;
    simulate_cmd->add_option("--spec", sim_spec, "phantom spec file")->required();
    simulate_cmd->add_option("--out", sim_out, "output directory")->required();
    simulate_cmd->add_option("--n", sim_n, "number of samples")->capture_default_str();
    simulate_cmd->add_option("--seed", sim_seed, "base seed")->capture_default_str();

    // segment
    auto* segment_cmd = app.add_subcommand("segment", "baseline probabilistic segmentation");
    std::string seg_image, seg_out;
    int seg_samples = 8;
    std::uint64_t seg_seed = 1;
    bool seg_dump_stack = false;
    segment_cmd->add_option("--image", seg_image, "input PGM image")->required();
    segment_cmd->add_option("--out", seg_out, "output directory")->required();
    segment_cmd->add_option("--samples", seg_samples, "ensemble samples")->capture_default_str();
    segment_cmd->add_option("--seed", seg_seed, "base seed")->capture_default_str();
    segment_cmd->add_flag("--dump-stack", seg_dump_stack, "write per-sample probability rasters");

    // transform
    auto* transform_cmd = app.add_subcommand("transform", "hard maps to soft labels");
    std::string tr_image, tr_amean, tr_astd, tr_nmean, tr_nstd, tr_out;
    bool tr_dump = false;
    ConfigFlags tr_cfg;
    transform_cmd->add_option("--image", tr_image, "input PGM image")->required();
    transform_cmd->add_option("--artifact-mean", tr_amean, "artifact mean RF32")->required();
    transform_cmd->add_option("--artifact-std", tr_astd, "artifact std RF32")->required();
    transform_cmd->add_option("--needle-mean", tr_nmean, "needle mean RF32")->required();
    transform_cmd->add_option("--needle-std", tr_nstd, "needle std RF32")->required();
    transform_cmd->add_option("--out", tr_out, "output directory")->required();
    transform_cmd->add_flag("--dump-stages", tr_dump, "write intermediate stage rasters");
    tr_cfg.attach(*transform_cmd);

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "region metrics for soft outputs");
    std::vector<std::string> me_pred, me_labels;
    std::string me_out;
    ConfigFlags me_cfg;
    metrics_cmd->add_option("--pred", me_pred, "prediction directory (repeatable)")->required();
    metrics_cmd->add_option("--labels", me_labels, "region label directory (repeatable)")->required();
    metrics_cmd->add_option("--out", me_out, "report output file");
    me_cfg.attach(*metrics_cmd);

    // compound
    auto* compound_cmd = app.add_subcommand("compound", "artifact-aware multi-view compounding");
    std::vector<std::string> co_views;
    std::string co_out, co_source;
    ConfigFlags co_cfg;
    compound_cmd->add_option("--views", co_views, "IMAGE:ARTIFACT_MAP pairs (>= 2)")->required();
    compound_cmd->add_option("--out", co_out, "compounded PGM output")->required();
    compound_cmd->add_option("--source-map", co_source, "per-pixel source index RF32");
    co_cfg.attach(*compound_cmd);

    // loss
    auto* loss_cmd = app.add_subcommand("loss", "weighted soft-label loss");
    std::string lo_pred, lo_lmean, lo_lstd;
    ConfigFlags lo_cfg;
    loss_cmd->add_option("--pred", lo_pred, "prediction mean RF32")->required();
    loss_cmd->add_option("--label-mean", lo_lmean, "label mean RF32")->required();
    loss_cmd->add_option("--label-std", lo_lstd, "label std RF32")->required();
    lo_cfg.attach(*loss_cmd);

    // prune
    auto* prune_cmd = app.add_subcommand("prune", "uncertainty-based label pruning");
    std::string pr_labels, pr_unc, pr_out;
    int pr_patch = 16;
    double pr_quantile = 0.5;
    prune_cmd->add_option("--labels", pr_labels, "binary label PGM")->required();
    prune_cmd->add_option("--uncertainty", pr_unc, "uncertainty RF32")->required();
    prune_cmd->add_option("--patch", pr_patch, "block size")->capture_default_str();
    prune_cmd->add_option("--quantile", pr_quantile, "per-block keep quantile")->capture_default_str();
    prune_cmd->add_option("--out", pr_out, "pruned label PGM")->required();

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "segment, transform and score one image");
    std::string pi_image, pi_out, pi_labels;
    int pi_samples = 8;
    std::uint64_t pi_seed = 1;
    ConfigFlags pi_cfg;
    pipeline_cmd->add_option("--image", pi_image, "input PGM image")->required();
    pipeline_cmd->add_option("--out", pi_out, "output directory")->required();
    pipeline_cmd->add_option("--labels", pi_labels, "region label directory (enables metrics)");
    pipeline_cmd->add_option("--samples", pi_samples, "ensemble samples")->capture_default_str();
    pipeline_cmd->add_option("--seed", pi_seed, "base seed")->capture_default_str();
    pi_cfg.attach(*pipeline_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1; // usage errors collapse to exit 1
    }

    try {
        if (*simulate_cmd) return cmd_simulate(sim_spec, sim_out, sim_n, sim_seed, out);
        if (*segment_cmd)
            return cmd_segment(seg_image, seg_out, seg_samples, seg_seed, seg_dump_stack, out);
        if (*transform_cmd)
            return cmd_transform(tr_image, tr_amean, tr_astd, tr_nmean, tr_nstd, tr_out, tr_dump,
                                 tr_cfg.resolve(), out);
        if (*metrics_cmd) return cmd_metrics(me_pred, me_labels, me_out, me_cfg.resolve(), out, err);
        if (*compound_cmd)
            return cmd_compound(co_views, co_out, co_source, co_cfg.resolve().compound_t, out, err);
        if (*loss_cmd) return cmd_loss(lo_pred, lo_lmean, lo_lstd, lo_cfg.resolve(), out);
        if (*prune_cmd) return cmd_prune(pr_labels, pr_unc, pr_patch, pr_quantile, pr_out, out);
        if (*pipeline_cmd)
            return cmd_pipeline(pi_image, pi_out, pi_labels, pi_samples, pi_seed, pi_cfg.resolve(),
                                out, err);
    } catch (const FormatError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "error: no subcommand selected\n";
    return 1;
}

} // namespace reverb::cli
