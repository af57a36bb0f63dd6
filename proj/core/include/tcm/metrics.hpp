#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tcm/data.hpp"
#include "tcm/ie.hpp"
#include "tcm/tensor.hpp"

namespace tcm {

// Corpus-level BLEU on a 0-100 scale. Clipped n-gram counts and lengths are
// pooled over the corpus before the geometric mean; no smoothing, so any zero
// precision gives 0. Throws std::invalid_argument on an empty or mismatched list.
Real bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n = 4);
Real sentence_bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                   std::size_t max_n = 4);

struct FidelityScore {
    Real precision = 0.0;  // percent; 0 when nothing is extracted
    std::size_t count = 0;
};

FidelityScore content_fidelity(const RecordSet& extracted, const Table& x);
FidelityScore content_fidelity(std::span<const std::string> z, const Table& x, const ExtractorOptions& options = {});

struct SelectionScore {
    Real precision = 0.0;
    Real recall = 0.0;
    Real f1 = 0.0;
};

SelectionScore content_selection(const RecordSet& generated, const RecordSet& gold);
// z is extracted against x, y_aux against x_gold.
SelectionScore content_selection(std::span<const std::string> z, std::span<const std::string> y_aux, const Table& x,
                                 const Table& x_gold, const ExtractorOptions& options = {});

struct MetricReport {
    std::size_t instances = 0;
    Real style_bleu = 0.0;
    Real cf_precision = 0.0;
    Real cf_count = 0.0;  // mean unique correct records per summary
    Real cs_precision = 0.0;
    Real cs_recall = 0.0;
    Real cs_f1 = 0.0;     // harmonic mean of the two averages above
    bool masked = false;  // style BLEU computed on record-masked text

    std::string to_json() const;
    std::string to_table() const;
};

struct EvalOptions {
    bool mask_records = false;
    ExtractorOptions extractor;
};

// generations[i] is scored against corpus[i]: BLEU against y', CF against x,
// CS against the records of y_aux. With mask_records, record tokens of the
// generation (w.r.t. x) and of y' (w.r.t. x') are replaced before BLEU.
MetricReport evaluate(std::span<const Tokens> generations, std::span<const Instance> corpus,
                      const EvalOptions& options = {});

}  // namespace tcm
