#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "omht/kernel.hpp"
#include "omht/mmd.hpp"
#include "omht/observations.hpp"

namespace omht {

// Largest admissible outlier-set size: ceil(M/2) - 1.
constexpr std::size_t max_outliers(std::size_t m) { return (m + 1) / 2 - 1; }

// Candidate outlier set: sorted distinct 0-based indices, 1 <= size <= max_outliers(M).
struct CandidateSet {
    std::vector<std::size_t> indices;

    CandidateSet() = default;
    explicit CandidateSet(std::vector<std::size_t> idx) : indices(std::move(idx)) {}

    std::size_t size() const { return indices.size(); }
    bool contains(std::size_t i) const;
    void validate(std::size_t m) const;

    friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

// Scores of all size-t candidate sets, in lexicographic enumeration order,
// with the minimizer (lexicographically smallest on ties) and the second
// smallest score h_t.
struct ScoreTable {
    std::size_t t = 0;
    std::vector<CandidateSet> sets;
    std::vector<double> scores;
    std::size_t best_index = 0;
    double best_score = 0.0;
    double second_score = 0.0;

    const CandidateSet& best_set() const { return sets[best_index]; }
};

// Concatenation (ascending index) of all sequences outside b and j.
std::vector<double> pooled_complement(const ObservationSet& y, const CandidateSet& b, std::size_t j);

// Incrementally maintained within-sequence and cross-sequence kernel sums
// over an observation set. Each score evaluation combines cached sums, so a
// full score table costs O(M^2) per entry instead of a fresh O((Mn)^2) pass,
// and appending one column costs O(M^2 n).
//
// Cross sums are accumulated in a label-independent order (per new column,
// terms grouped symmetrically across the pair) and score combinations sum
// their cached atoms in ascending value order, so relabeling the sequences
// permutes scores bit-exactly.
class PairwiseKernelSums {
  public:
    PairwiseKernelSums(KernelSpec spec, const ObservationSet& y);

    void append_column(std::span<const double> values);

    const ObservationSet& observations() const { return y_; }
    std::size_t num_sequences() const { return y_.num_sequences(); }
    std::size_t length() const { return y_.length(); }
    const KernelSpec& kernel() const { return spec_; }

    // Sum of k over ordered within-sequence pairs a != b of sequence i.
    double within_sum(std::size_t i) const { return within_[i].value(); }
    // Full cross sum over samples of the unordered sequence pair {i, l}.
    double cross_sum(std::size_t i, std::size_t l) const;

    // Unbiased MMD^2 between sequence j and the pool of every sequence not
    // in `excluded` and != j (excluded must be sorted; may be empty).
    double pair_mmd2(std::size_t j, std::span<const std::size_t> excluded) const;

    // max over j outside b of pair_mmd2(j, b).
    double score(const CandidateSet& b) const;

    ScoreTable table(std::size_t t) const;

  private:
    std::size_t pair_index(std::size_t i, std::size_t l) const;

    KernelSpec spec_;
    ObservationSet y_;
    std::vector<CompensatedSum> within_;
    std::vector<CompensatedSum> cross_;  // upper triangle, i < l
};

// One-shot functional forms over a fresh observation set.
double score_G(const KernelSpec& spec, const ObservationSet& y, const CandidateSet& b);
ScoreTable score_table(const KernelSpec& spec, const ObservationSet& y, std::size_t t);

}  // namespace omht
