#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcm/data.hpp"
#include "tcm/decoder.hpp"
#include "tcm/metrics.hpp"
#include "tcm/model.hpp"
#include "tcm/optim.hpp"
#include "tcm/training.hpp"

namespace tcm {

struct Generation {
    std::string id;
    Tokens tokens;
    Real score = 0.0;
    std::optional<std::string> attention_json;
};

// Beam search over (x, y') for every instance, in corpus order.
std::vector<Generation> generate_corpus(const Model& model, std::span<const Instance> corpus, const BeamOptions& options,
                                        bool keep_attention = false);

// One JSON object per line: {"id", "text", "tokens", "score"[, "attention"]}.
void write_generations(std::ostream& out, std::span<const Generation> gens);
void write_generations_file(const std::string& path, std::span<const Generation> gens);
std::vector<Generation> read_generations(std::istream& in);
std::vector<Generation> read_generations_file(const std::string& path);

// Orders generations to match the corpus by id; throws if any instance is missing.
std::vector<Tokens> align_generations(std::span<const Generation> gens, std::span<const Instance> corpus);

// Deterministic train / held-out split: the last `held_out` instances are held out.
std::pair<std::vector<Instance>, std::vector<Instance>> split_corpus(std::span<const Instance> corpus,
                                                                     std::size_t held_out);

// Finite-difference check of the full weighted objective on one instance,
// dropout off. z for the back-translation term comes from greedy decoding.
GradCheckResult grad_check_joint(Model& model, const Instance& inst, const StageWeights& weights,
                                 const GradCheckOptions& options = {});

// Tiny fixture: 2-record table, 3-token texts.
Instance gradcheck_instance();

}  // namespace tcm
