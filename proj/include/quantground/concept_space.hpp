#pragma once

// Concept inventory: one unit-norm visual vector plus one word vector per
// named concept. Inventories are either synthesized (isotropic Gaussian
// visual vectors; word vectors correlated through a random orthogonal map)
// or ingested from externally produced vector tables, in which case both
// spaces are PCA-reduced and the visual side renormalized.

#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "quantground/io.hpp"
#include "quantground/pca.hpp"
#include "quantground/rng.hpp"
#include "quantground/vec.hpp"

namespace qg {

struct Concept {
    std::string name;
    Vec visual;  // unit norm
    Vec word;
};

class ConceptInventory {
  public:
    /// Validates names and visual norms, computes the mean pairwise cosine.
    static ConceptInventory from_concepts(std::vector<Concept> concepts) {
        if (concepts.size() < 2)
            throw std::invalid_argument("ConceptInventory: need at least 2 concepts");
        const std::size_t d = concepts[0].visual.size();
        const std::size_t dw = concepts[0].word.size();
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < concepts.size(); ++i) {
            const Concept& c = concepts[i];
            if (c.name.empty())
                throw std::invalid_argument("ConceptInventory: empty concept name at index " +
                                            std::to_string(i));
            if (!index.emplace(c.name, i).second)
                throw std::invalid_argument("ConceptInventory: duplicate concept name '" + c.name + "'");
            if (c.visual.size() != d || c.word.size() != dw)
                throw std::invalid_argument("ConceptInventory: mixed dimensions at '" + c.name + "'");
            if (std::abs(norm(c.visual) - 1.0) > 1e-9)
                throw std::invalid_argument("ConceptInventory: visual vector of '" + c.name +
                                            "' is not unit norm");
        }
        ConceptInventory inv;
        inv.concepts_ = std::move(concepts);
        inv.index_ = std::move(index);
        double sum = 0.0;
        for (std::size_t i = 0; i < inv.concepts_.size(); ++i)
            for (std::size_t j = i + 1; j < inv.concepts_.size(); ++j)
                sum += cosine(inv.concepts_[i].visual, inv.concepts_[j].visual);
        const std::size_t pairs = inv.concepts_.size() * (inv.concepts_.size() - 1) / 2;
        inv.mean_pairwise_cosine_ = sum / static_cast<double>(pairs);
        return inv;
    }

    const std::vector<Concept>& concepts() const { return concepts_; }
    std::size_t size() const { return concepts_.size(); }
    std::size_t dim() const { return concepts_[0].visual.size(); }
    std::size_t word_dim() const { return concepts_[0].word.size(); }
    double mean_pairwise_cosine() const { return mean_pairwise_cosine_; }
    const Concept& at(std::size_t i) const { return concepts_.at(i); }

    std::optional<std::size_t> index_of(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    const Concept& by_name(const std::string& name) const {
        const auto idx = index_of(name);
        if (!idx) throw std::invalid_argument("unknown concept '" + name + "'");
        return concepts_[*idx];
    }

  private:
    ConceptInventory() = default;
    std::vector<Concept> concepts_;
    std::unordered_map<std::string, std::size_t> index_;
    double mean_pairwise_cosine_ = 0.0;
};

/// Mean cosine over all unordered pairs of visual vectors, recomputed.
inline double mean_pairwise_cosine(const ConceptInventory& inv) {
    if (inv.size() < 2) throw std::invalid_argument("mean_pairwise_cosine: need at least 2 concepts");
    double sum = 0.0;
    for (std::size_t i = 0; i < inv.size(); ++i)
        for (std::size_t j = i + 1; j < inv.size(); ++j)
            sum += cosine(inv.at(i).visual, inv.at(j).visual);
    return sum / static_cast<double>(inv.size() * (inv.size() - 1) / 2);
}

enum class WordMode { correlated, independent };

inline const char* to_string(WordMode m) {
    return m == WordMode::correlated ? "correlated" : "independent";
}

inline WordMode word_mode_from_string(const std::string& s) {
    if (s == "correlated") return WordMode::correlated;
    if (s == "independent") return WordMode::independent;
    throw std::invalid_argument("unknown word mode '" + s + "'");
}

struct SynthesisConfig {
    std::size_t concept_count = 188;
    std::size_t dim = 100;
    WordMode word_mode = WordMode::correlated;
    double word_noise = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        if (concept_count < 10)
            throw std::invalid_argument("SynthesisConfig: concept_count must be >= 10");
        if (dim == 0) throw std::invalid_argument("SynthesisConfig: dim must be positive");
        if (!(word_noise >= 0.0))
            throw std::invalid_argument("SynthesisConfig: word_noise must be >= 0");
    }
};

namespace detail {

/// Random orthogonal d x d matrix: QR of a Gaussian matrix with the R
/// diagonal forced positive, which makes the draw Haar-distributed and
/// the result deterministic for a given stream.
inline Eigen::MatrixXd random_orthogonal(std::size_t d, Rng& rng) {
    const Eigen::Index n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

inline std::string synthetic_name(std::size_t i) {
    std::string num = std::to_string(i);
    while (num.size() < 3) num.insert(num.begin(), '0');
    return "concept_" + num;
}

} // namespace detail

inline ConceptInventory synthesize_inventory(const SynthesisConfig& cfg) {
    cfg.validate();
    Rng visual_rng(derive_seed(cfg.seed, 1));
    Rng map_rng(derive_seed(cfg.seed, 2));
    Rng noise_rng(derive_seed(cfg.seed, 3));

    std::vector<Concept> concepts(cfg.concept_count);
    for (std::size_t i = 0; i < cfg.concept_count; ++i) {
        concepts[i].name = detail::synthetic_name(i);
        concepts[i].visual = normalize(visual_rng.gaussian_vec(cfg.dim));
    }

    if (cfg.word_mode == WordMode::independent) {
        for (Concept& c : concepts) c.word = normalize(noise_rng.gaussian_vec(cfg.dim));
    } else {
        const Eigen::MatrixXd q = detail::random_orthogonal(cfg.dim, map_rng);
        for (Concept& c : concepts) {
            Vec w(cfg.dim, 0.0);
            for (std::size_t r = 0; r < cfg.dim; ++r) {
                double s = 0.0;
                for (std::size_t k = 0; k < cfg.dim; ++k)
                    s += q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) * c.visual[k];
                w[r] = s;
            }
            if (cfg.word_noise > 0.0) axpy(w, cfg.word_noise, noise_rng.gaussian_vec(cfg.dim));
            c.word = normalize(w);
        }
    }
    return ConceptInventory::from_concepts(std::move(concepts));
}

/// Replays the preprocessing on externally produced vectors: PCA-reduce
/// both spaces to target_dim, renormalize the visual side only.
inline ConceptInventory ingest_inventory(const std::filesystem::path& visual_file,
                                         const std::filesystem::path& word_file,
                                         std::size_t target_dim) {
    const io::VectorTable visual = io::read_vector_table(visual_file);
    const io::VectorTable word = io::read_vector_table(word_file);

    std::unordered_map<std::string, const Vec*> word_by_name;
    for (const auto& [name, v] : word.rows) word_by_name.emplace(name, &v);

    std::vector<std::string> missing;
    for (const auto& [name, v] : visual.rows)
        if (!word_by_name.count(name)) missing.push_back(name);
    if (!missing.empty()) {
        std::string msg = "ingest: word file is missing concepts:";
        for (const std::string& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }
    if (word.rows.size() != visual.rows.size()) {
        std::set<std::string> visual_names;
        for (const auto& [name, v] : visual.rows) visual_names.insert(name);
        std::string msg = "ingest: visual file is missing concepts:";
        for (const auto& [name, v] : word.rows)
            if (!visual_names.count(name)) msg += " " + name;
        throw std::runtime_error(msg);
    }

    std::vector<Vec> visual_rows;
    std::vector<Vec> word_rows;
    visual_rows.reserve(visual.rows.size());
    word_rows.reserve(visual.rows.size());
    for (const auto& [name, v] : visual.rows) {
        visual_rows.push_back(v);
        word_rows.push_back(*word_by_name.at(name));
    }

    const PcaModel visual_pca = pca_fit(visual_rows, target_dim);
    const PcaModel word_pca = pca_fit(word_rows, target_dim);

    std::vector<Concept> concepts(visual.rows.size());
    for (std::size_t i = 0; i < concepts.size(); ++i) {
        concepts[i].name = visual.rows[i].first;
        concepts[i].visual = normalize(pca_transform(visual_pca, visual_rows[i]));
        concepts[i].word = pca_transform(word_pca, word_rows[i]);
    }
    return ConceptInventory::from_concepts(std::move(concepts));
}

/// Load an already-processed inventory (as written by save_inventory).
inline ConceptInventory load_inventory(const std::filesystem::path& visual_file,
                                       const std::filesystem::path& word_file) {
    const io::VectorTable visual = io::read_vector_table(visual_file);
    const io::VectorTable word = io::read_vector_table(word_file);
    if (visual.rows.size() != word.rows.size())
        throw std::runtime_error("inventory files disagree on concept count");
    std::unordered_map<std::string, const Vec*> word_by_name;
    for (const auto& [name, v] : word.rows) word_by_name.emplace(name, &v);
    std::vector<Concept> concepts(visual.rows.size());
    for (std::size_t i = 0; i < concepts.size(); ++i) {
        const auto& [name, v] = visual.rows[i];
        const auto it = word_by_name.find(name);
        if (it == word_by_name.end())
            throw std::runtime_error("inventory word file is missing concept '" + name + "'");
        concepts[i] = Concept{name, v, *it->second};
    }
    return ConceptInventory::from_concepts(std::move(concepts));
}

inline void save_inventory(const ConceptInventory& inv, const std::filesystem::path& visual_file,
                           const std::filesystem::path& word_file,
                           const std::vector<std::string>& meta = {}) {
    io::VectorTable visual;
    io::VectorTable word;
    visual.dim = inv.dim();
    word.dim = inv.word_dim();
    for (const Concept& c : inv.concepts()) {
        visual.rows.emplace_back(c.name, c.visual);
        word.rows.emplace_back(c.name, c.word);
    }
    io::write_vector_table(visual_file, visual, meta);
    io::write_vector_table(word_file, word, meta);
}

} // namespace qg
