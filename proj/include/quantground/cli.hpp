#pragma once

// Command-line pipeline. Subcommands cover the stages gen (inventory),
// build (datasets), analyze (only-vision reports), train (mapping
// models) and eval (retrieval reports); `all` chains them. Every
// command is a pure function of config and input files, so identical
// invocations rewrite identical bytes.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/config.hpp"
#include "quantground/io.hpp"
#include "quantground/mapping.hpp"
#include "quantground/reports.hpp"
#include "quantground/retrieval.hpp"
#include "quantground/scenario.hpp"
#include "quantground/svm.hpp"
#include "quantground/vision_analysis.hpp"

namespace qg::cli {

struct Paths {
    std::filesystem::path root;

    explicit Paths(const std::string& out_dir) : root(out_dir) {}

    std::filesystem::path run_config() const { return root / "run_config.txt"; }
    std::filesystem::path visual() const { return root / "inventory_visual.vec"; }
    std::filesystem::path word() const { return root / "inventory_word.vec"; }
    std::filesystem::path manifest(Kind k) const {
        return root / (std::string(to_string(k)) + ".manifest.tsv");
    }
    std::filesystem::path model(Expression e, Variant v) const {
        return root / "models" / (std::string(to_string(e)) + "." + to_string(v) + ".model");
    }
    std::filesystem::path report(const std::string& name) const { return root / "reports" / name; }
};

namespace detail {

inline std::vector<std::string> meta_lines(const RunConfig& cfg) {
    return {"config " + config_digest(cfg), "seed " + std::to_string(cfg.seed)};
}

inline SvmConfig svm_config(const RunConfig& cfg) {
    SvmConfig sc;
    sc.gamma = cfg.svm_gamma;
    sc.c = cfg.svm_c;
    sc.tolerance = cfg.svm_tolerance;
    return sc;
}

inline ConceptInventory load_run_inventory(const Paths& paths) {
    return load_inventory(paths.visual(), paths.word());
}

inline void write_run_config(const RunConfig& cfg, const Paths& paths) {
    io::write_file(paths.run_config(), serialize_config(cfg));
}

/// Per-model RNG streams and the analysis stream are derived from the
/// run seed, so stages stay reproducible in isolation.
inline std::uint64_t model_seed(const RunConfig& cfg, Variant v, Expression e) {
    return derive_seed(cfg.seed, 40 + variant_index(v), static_cast<std::uint64_t>(e));
}

inline std::uint64_t analysis_seed(const RunConfig& cfg) { return derive_seed(cfg.seed, 30); }

} // namespace detail

inline void cmd_gen(const RunConfig& cfg, std::ostream& out) {
    const Paths paths(cfg.out_dir);
    detail::write_run_config(cfg, paths);
    const ConceptInventory inv =
        cfg.ingest_visual.empty()
            ? synthesize_inventory(SynthesisConfig{cfg.concept_count, cfg.dim, cfg.word_mode,
                                                   cfg.word_noise, cfg.seed})
            : ingest_inventory(cfg.ingest_visual, cfg.ingest_word, cfg.dim);
    save_inventory(inv, paths.visual(), paths.word(), detail::meta_lines(cfg));
    out << "gen: " << inv.size() << " concepts, visual dim " << inv.dim() << ", word dim "
        << inv.word_dim() << ", mean pairwise cosine " << inv.mean_pairwise_cosine() << "\n";
}

inline void cmd_build(const RunConfig& cfg, std::ostream& out) {
    const Paths paths(cfg.out_dir);
    detail::write_run_config(cfg, paths);
    const ConceptInventory inv = detail::load_run_inventory(paths);
    const ComboTable table = default_combo_table();
    for (const Kind kind : {Kind::quantifier, Kind::cardinal}) {
        const Dataset ds = build_dataset(inv, kind, cfg.mode, table, cfg.seed);
        const ValidationReport rep = validate_dataset(ds, inv);
        if (!rep.ok) {
            std::string msg = "build: " + std::string(to_string(kind)) + " dataset failed validation (" +
                              std::to_string(rep.violations.size()) + " violations; first: " +
                              rep.violations.front() + ")";
            throw std::runtime_error(msg);
        }
        save_manifest(ds, paths.manifest(kind), detail::meta_lines(cfg));
        std::size_t train_count = 0;
        for (const Scenario& sc : ds.scenarios) train_count += sc.split == Split::train ? 1 : 0;
        out << "build: " << to_string(kind) << " dataset, " << ds.scenarios.size()
            << " scenarios (" << train_count << " train / " << ds.scenarios.size() - train_count
            << " test), mode " << to_string(ds.mode) << "\n";
    }
}

inline void cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const Paths paths(cfg.out_dir);
    detail::write_run_config(cfg, paths);
    const ConceptInventory inv = detail::load_run_inventory(paths);
    const Dataset dsq = load_manifest(paths.manifest(Kind::quantifier));
    const Dataset dsc = load_manifest(paths.manifest(Kind::cardinal));
    const std::vector<std::string> meta = detail::meta_lines(cfg);

    std::vector<SimilarityProfile> profiles;
    for (const Dataset* ds : {&dsq, &dsc})
        for (const Measure m : {Measure::cosine_distance, Measure::dot})
            for (const Split s : {Split::train, Split::test})
                profiles.push_back(similarity_profile(*ds, inv, m, s));
    io::write_file(paths.report("profiles.csv"), render_profiles_csv(profiles, meta));

    const SvmComparison cmp =
        svm_compare(dsq, dsc, inv, cfg.svm_folds, detail::analysis_seed(cfg), detail::svm_config(cfg));
    io::write_file(paths.report("svm_accuracy.csv"), render_svm_csv(cmp, meta));
    io::write_file(paths.report("svm_accuracy.txt"), render_svm_text(cmp, meta));

    out << "analyze: wrote profiles.csv and svm_accuracy.{txt,csv}; cv accuracy"
        << " q/cos " << qg::detail::fmt_fixed(cmp.cv_accuracy[0][0], 3)
        << ", q/dot " << qg::detail::fmt_fixed(cmp.cv_accuracy[0][1], 3)
        << ", c/cos " << qg::detail::fmt_fixed(cmp.cv_accuracy[1][0], 3)
        << ", c/dot " << qg::detail::fmt_fixed(cmp.cv_accuracy[1][1], 3) << "\n";
}

inline void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const Paths paths(cfg.out_dir);
    detail::write_run_config(cfg, paths);
    const ConceptInventory inv = detail::load_run_inventory(paths);
    const std::vector<std::string> meta = detail::meta_lines(cfg);

    std::size_t written = 0;
    std::vector<std::string> failures;
    for (const Kind kind : {Kind::quantifier, Kind::cardinal}) {
        const Dataset ds = load_manifest(paths.manifest(kind));
        for (const Expression expr : expressions_of(kind)) {
            const std::vector<TrainingPair> pairs = collect_pairs(ds, inv, expr, Split::train);
            for (const Variant variant : {Variant::lin, Variant::nn_cos, Variant::nn_dot}) {
                TrainConfig tc;
                tc.learning_rate = cfg.learning_rate;
                tc.epochs = cfg.epochs;
                tc.init_scale = cfg.init_scale;
                tc.seed = detail::model_seed(cfg, variant, expr);
                try {
                    const MappingModel model = train(variant, expr, pairs, tc);
                    save_model(model, paths.model(expr, variant), meta);
                    ++written;
                } catch (const std::exception& e) {
                    const std::string what = std::string(to_string(expr)) + "/" + to_string(variant) +
                                             ": " + e.what();
                    err << "train: " << what << "\n";
                    failures.push_back(what);
                }
            }
        }
    }
    out << "train: wrote " << written << " model files\n";
    if (!failures.empty())
        throw std::runtime_error("train: " + std::to_string(failures.size()) +
                                 " of 24 models failed (first: " + failures.front() + ")");
}

inline void cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const Paths paths(cfg.out_dir);
    detail::write_run_config(cfg, paths);
    const ConceptInventory inv = detail::load_run_inventory(paths);
    const std::vector<std::string> meta = detail::meta_lines(cfg);

    std::vector<RetrievalReport> reports;
    std::array<Variant, 2> best{};
    for (const Kind kind : {Kind::quantifier, Kind::cardinal}) {
        const Dataset ds = load_manifest(paths.manifest(kind));
        std::vector<MappingModel> models;
        for (const Expression expr : expressions_of(kind))
            for (const Variant variant : {Variant::lin, Variant::nn_cos, Variant::nn_dot})
                models.push_back(load_model(paths.model(expr, variant)));
        reports.push_back(evaluate(models, ds, inv));
        best[kind_index(kind)] = best_variant_by_map(reports.back());
    }

    io::write_file(paths.report("retrieval.csv"), render_retrieval_csv(reports, meta));
    io::write_file(paths.report("retrieval.txt"), render_retrieval_text(reports, meta));
    io::write_file(paths.report("confusion_quantifier.csv"),
                   render_confusion_csv(reports[0], best[0], meta));
    io::write_file(paths.report("confusion_cardinal.csv"),
                   render_confusion_csv(reports[1], best[1], meta));

    out << "eval: wrote retrieval.{txt,csv}; best quantifier variant " << to_string(best[0])
        << " (mean mAP " << qg::detail::fmt_fixed(reports[0].mean_map(best[0]), 3)
        << "), best cardinal variant " << to_string(best[1]) << " (mean mAP "
        << qg::detail::fmt_fixed(reports[1].mean_map(best[1]), 3) << ")\n";
}

inline void cmd_all(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    cmd_gen(cfg, out);
    cmd_build(cfg, out);
    cmd_analyze(cfg, out);
    cmd_train(cfg, out, err);
    cmd_eval(cfg, out);
}

/// Parses arguments (program name excluded), resolves the config with
/// precedence flags > config file > defaults, and runs the subcommand.
/// Returns the process exit code; failures print one diagnostic line.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    CLI::App app{"synthetic grounded-quantifier pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir, mode, word_mode, ingest_visual, ingest_word;
    std::optional<std::size_t> concepts, dim, epochs, folds;
    std::optional<double> word_noise, learning_rate;

    app.add_option("--config", config_path, "config file (key=value lines)");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--mode", mode, "scene composition mode")
        ->check(CLI::IsMember({"summed", "concat"}));
    app.add_option("--word-mode", word_mode, "word vector mode")
        ->check(CLI::IsMember({"correlated", "independent"}));
    app.add_option("--concepts", concepts, "concept count");
    app.add_option("--dim", dim, "vector dimensionality");
    app.add_option("--word-noise", word_noise, "word vector noise level");
    app.add_option("--epochs", epochs, "training epochs");
    app.add_option("--learning-rate", learning_rate, "training learning rate");
    app.add_option("--folds", folds, "cross-validation folds");
    app.add_option("--ingest-visual", ingest_visual, "visual vector table to ingest");
    app.add_option("--ingest-word", ingest_word, "word vector table to ingest");

    for (const char* name : {"gen", "build", "analyze", "train", "eval", "all"})
        app.add_subcommand(name);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        if (mode) cfg.mode = mode_from_string(*mode);
        if (word_mode) cfg.word_mode = word_mode_from_string(*word_mode);
        if (concepts) cfg.concept_count = *concepts;
        if (dim) cfg.dim = *dim;
        if (word_noise) cfg.word_noise = *word_noise;
        if (epochs) cfg.epochs = *epochs;
        if (learning_rate) cfg.learning_rate = *learning_rate;
        if (folds) cfg.svm_folds = *folds;
        if (ingest_visual) cfg.ingest_visual = *ingest_visual;
        if (ingest_word) cfg.ingest_word = *ingest_word;
        cfg.validate();

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "gen") cmd_gen(cfg, out);
        else if (command == "build") cmd_build(cfg, out);
        else if (command == "analyze") cmd_analyze(cfg, out);
        else if (command == "train") cmd_train(cfg, out, err);
        else if (command == "eval") cmd_eval(cfg, out);
        else cmd_all(cfg, out, err);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace qg::cli
