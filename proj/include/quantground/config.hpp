#pragma once

// Run configuration. One flat key=value format serves the config file,
// the run_config.txt snapshot and the digest embedded in every output
// file. The digest covers every result-affecting key, so reruns into
// different directories stay comparable byte for byte.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "quantground/concept_space.hpp"
#include "quantground/io.hpp"
#include "quantground/scenario.hpp"

namespace qg {

struct RunConfig {
    std::uint64_t seed = 42;
    std::size_t concept_count = 188;
    std::size_t dim = 100;
    WordMode word_mode = WordMode::correlated;
    double word_noise = 0.1;
    CompositionMode mode = CompositionMode::summed;
    double learning_rate = 0.01;
    std::size_t epochs = 500;
    double init_scale = 0.1;
    double svm_c = 1.0;
    double svm_gamma = 0.0;  // <= 0 selects 1 / Var(features)
    double svm_tolerance = 1e-3;
    std::size_t svm_folds = 5;
    std::string out_dir = "out";
    std::string ingest_visual;  // both ingest paths set, or neither
    std::string ingest_word;

    void validate() const {
        if (concept_count < 10) throw std::invalid_argument("config: concept_count must be >= 10");
        if (dim == 0) throw std::invalid_argument("config: dim must be >= 1");
        if (!(word_noise >= 0.0)) throw std::invalid_argument("config: word_noise must be >= 0");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
        if (epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
        if (!(init_scale >= 0.0)) throw std::invalid_argument("config: init_scale must be >= 0");
        if (!(svm_c > 0.0)) throw std::invalid_argument("config: svm_c must be > 0");
        if (!(svm_tolerance > 0.0)) throw std::invalid_argument("config: svm_tolerance must be > 0");
        if (svm_folds < 2) throw std::invalid_argument("config: svm_folds must be >= 2");
        if (ingest_visual.empty() != ingest_word.empty())
            throw std::invalid_argument("config: ingest_visual and ingest_word must be set together");
        if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
    }
};

/// Canonical text form, fixed key order. out_dir does not influence any
/// result, so the digest variant leaves it out.
inline std::string serialize_config(const RunConfig& c, bool include_out_dir = true) {
    std::string out;
    out += "seed=" + std::to_string(c.seed) + "\n";
    out += "concept_count=" + std::to_string(c.concept_count) + "\n";
    out += "dim=" + std::to_string(c.dim) + "\n";
    out += std::string("word_mode=") + to_string(c.word_mode) + "\n";
    out += "word_noise=" + io::fmt_double(c.word_noise) + "\n";
    out += std::string("mode=") + to_string(c.mode) + "\n";
    out += "learning_rate=" + io::fmt_double(c.learning_rate) + "\n";
    out += "epochs=" + std::to_string(c.epochs) + "\n";
    out += "init_scale=" + io::fmt_double(c.init_scale) + "\n";
    out += "svm_c=" + io::fmt_double(c.svm_c) + "\n";
    out += "svm_gamma=" + io::fmt_double(c.svm_gamma) + "\n";
    out += "svm_tolerance=" + io::fmt_double(c.svm_tolerance) + "\n";
    out += "svm_folds=" + std::to_string(c.svm_folds) + "\n";
    if (include_out_dir) out += "out_dir=" + c.out_dir + "\n";
    out += "ingest_visual=" + c.ingest_visual + "\n";
    out += "ingest_word=" + c.ingest_word + "\n";
    return out;
}

inline std::string config_digest(const RunConfig& c) {
    return io::hex64(io::fnv1a64(serialize_config(c, false)));
}

/// Applies one key=value assignment. Unknown keys and malformed values
/// raise with the offending key named.
inline void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "seed") c.seed = io::parse_u64(value, key);
        else if (key == "concept_count") c.concept_count = io::parse_u64(value, key);
        else if (key == "dim") c.dim = io::parse_u64(value, key);
        else if (key == "word_mode") c.word_mode = word_mode_from_string(value);
        else if (key == "word_noise") c.word_noise = io::parse_double(value, key);
        else if (key == "mode") c.mode = mode_from_string(value);
        else if (key == "learning_rate") c.learning_rate = io::parse_double(value, key);
        else if (key == "epochs") c.epochs = io::parse_u64(value, key);
        else if (key == "init_scale") c.init_scale = io::parse_double(value, key);
        else if (key == "svm_c") c.svm_c = io::parse_double(value, key);
        else if (key == "svm_gamma") c.svm_gamma = io::parse_double(value, key);
        else if (key == "svm_tolerance") c.svm_tolerance = io::parse_double(value, key);
        else if (key == "svm_folds") c.svm_folds = io::parse_u64(value, key);
        else if (key == "out_dir") c.out_dir = value;
        else if (key == "ingest_visual") c.ingest_visual = value;
        else if (key == "ingest_word") c.ingest_word = value;
        else throw std::runtime_error("unknown config key '" + key + "'");
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("config key '" + key + "': " + e.what());
    }
}

/// Reads a config file over the given defaults. Lines are key=value;
/// blank lines and '#' comments are skipped.
inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
    const std::string text = io::read_file(path);
    const std::vector<std::string> lines = io::to_lines(text);
    const std::string fname = path.filename().string();
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string line = lines[ln];
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line.erase(0, start);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(fname + ":" + std::to_string(ln + 1) + ": expected key=value");
        auto strip = [](std::string s) {
            std::size_t b = 0, e = s.size();
            while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
            while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
            return s.substr(b, e - b);
        };
        try {
            apply_config_entry(base, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::runtime_error(fname + ":" + std::to_string(ln + 1) + ": " + e.what());
        }
    }
    return base;
}

} // namespace qg
