#include "omht/scoring.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace omht {

bool CandidateSet::contains(std::size_t i) const {
    return std::binary_search(indices.begin(), indices.end(), i);
}

void CandidateSet::validate(std::size_t m) const {
    if (indices.empty()) throw std::invalid_argument("candidate set must be non-empty");
    if (indices.size() > max_outliers(m))
        throw std::invalid_argument("candidate set larger than ceil(M/2)-1");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= m) throw std::invalid_argument("candidate index out of range");
        if (k > 0 && indices[k] <= indices[k - 1])
            throw std::invalid_argument("candidate indices must be sorted and distinct");
    }
}

std::vector<double> pooled_complement(const ObservationSet& y, const CandidateSet& b, std::size_t j) {
    b.validate(y.num_sequences());
    if (j >= y.num_sequences()) throw std::invalid_argument("probe index out of range");
    if (b.contains(j)) throw std::invalid_argument("probe index must lie outside the candidate set");

    std::vector<double> pooled;
    pooled.reserve((y.num_sequences() - b.size() - 1) * y.length());
    for (std::size_t i = 0; i < y.num_sequences(); ++i) {
        if (i == j || b.contains(i)) continue;
        const auto s = y.sequence(i);
        pooled.insert(pooled.end(), s.begin(), s.end());
    }
    if (pooled.empty()) throw std::invalid_argument("empty pooled complement");
    return pooled;
}

PairwiseKernelSums::PairwiseKernelSums(KernelSpec spec, const ObservationSet& y)
    : spec_(spec), y_(y.num_sequences()) {
    spec_.validate();
    const std::size_t m = y.num_sequences();
    within_.resize(m);
    cross_.resize(m * (m - 1) / 2);
    std::vector<double> col(m);
    for (std::size_t a = 0; a < y.length(); ++a) {
        for (std::size_t i = 0; i < m; ++i) col[i] = y.value(i, a);
        append_column(col);
    }
}

std::size_t PairwiseKernelSums::pair_index(std::size_t i, std::size_t l) const {
    if (i > l) std::swap(i, l);
    // position of (i,l), i < l, in the row-major upper triangle
    return i * (2 * y_.num_sequences() - i - 1) / 2 + (l - i - 1);
}

double PairwiseKernelSums::cross_sum(std::size_t i, std::size_t l) const {
    if (i == l) throw std::invalid_argument("cross sum needs two distinct sequences");
    return cross_[pair_index(i, l)].value();
}

void PairwiseKernelSums::append_column(std::span<const double> values) {
    const std::size_t m = y_.num_sequences();
    if (values.size() != m) throw std::invalid_argument("column size must equal the number of sequences");
    const std::size_t n = y_.length();

    for (std::size_t i = 0; i < m; ++i) {
        const auto row = y_.sequence(i);
        double local = 0.0;
        for (std::size_t a = 0; a < n; ++a) local += spec_(row[a], values[i]);
        within_[i].add(2.0 * local);
    }
    for (std::size_t i = 0; i < m; ++i) {
        const auto ri = y_.sequence(i);
        for (std::size_t l = i + 1; l < m; ++l) {
            const auto rl = y_.sequence(l);
            double local = 0.0;
            // grouped so the value is identical if the pair's roles swap
            for (std::size_t a = 0; a < n; ++a)
                local += spec_(ri[a], values[l]) + spec_(values[i], rl[a]);
            local += spec_(values[i], values[l]);
            cross_[pair_index(i, l)].add(local);
        }
    }
    y_.append_column(values);
}

double PairwiseKernelSums::pair_mmd2(std::size_t j, std::span<const std::size_t> excluded) const {
    const std::size_t m = y_.num_sequences();
    const std::size_t n = y_.length();
    if (n < 2) throw std::invalid_argument("insufficient samples: need length >= 2");
    if (j >= m) throw std::invalid_argument("probe index out of range");

    thread_local std::vector<std::size_t> rest;
    thread_local std::vector<double> atoms;

    rest.clear();
    for (std::size_t i = 0; i < m; ++i) {
        if (i == j) continue;
        if (std::binary_search(excluded.begin(), excluded.end(), i)) continue;
        rest.push_back(i);
    }
    if (rest.empty()) throw std::invalid_argument("empty pooled complement");

    // pooled within-sum: whole-sequence sums plus doubled cross sums,
    // added in value order so any relabeling reproduces the same bits
    atoms.clear();
    for (std::size_t i : rest) atoms.push_back(within_[i].value());
    for (std::size_t a = 0; a < rest.size(); ++a)
        for (std::size_t b = a + 1; b < rest.size(); ++b)
            atoms.push_back(2.0 * cross_[pair_index(rest[a], rest[b])].value());
    std::sort(atoms.begin(), atoms.end());
    double pool_within = 0.0;
    for (double v : atoms) pool_within += v;

    atoms.clear();
    for (std::size_t i : rest) atoms.push_back(cross_[pair_index(j, i)].value());
    std::sort(atoms.begin(), atoms.end());
    double probe_cross = 0.0;
    for (double v : atoms) probe_cross += v;

    const double nn = static_cast<double>(n);
    const double ll = static_cast<double>(rest.size()) * nn;
    return within_[j].value() / (nn * (nn - 1.0)) + pool_within / (ll * (ll - 1.0)) -
           2.0 * probe_cross / (nn * ll);
}

double PairwiseKernelSums::score(const CandidateSet& b) const {
    b.validate(y_.num_sequences());
    bool first = true;
    double best = 0.0;
    for (std::size_t j = 0; j < y_.num_sequences(); ++j) {
        if (b.contains(j)) continue;
        const double v = pair_mmd2(j, b.indices);
        if (first || v > best) best = v, first = false;
    }
    return best;
}

ScoreTable PairwiseKernelSums::table(std::size_t t) const {
    const std::size_t m = y_.num_sequences();
    if (t < 1 || t > max_outliers(m))
        throw std::invalid_argument("candidate size out of range [1, ceil(M/2)-1]");

    ScoreTable out;
    out.t = t;

    // lexicographic enumeration of all size-t index sets
    std::vector<std::size_t> idx(t);
    for (std::size_t k = 0; k < t; ++k) idx[k] = k;
    while (true) {
        CandidateSet b(idx);
        const double v = score(b);
        out.sets.push_back(std::move(b));
        out.scores.push_back(v);

        std::size_t k = t;
        while (k > 0 && idx[k - 1] == m - t + (k - 1)) --k;
        if (k == 0) break;
        ++idx[k - 1];
        for (std::size_t u = k; u < t; ++u) idx[u] = idx[u - 1] + 1;
    }

    out.best_index = 0;
    double best = out.scores[0];
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < out.scores.size(); ++i) {
        const double v = out.scores[i];
        if (v < best) {
            second = best;
            best = v;
            out.best_index = i;
        } else if (v < second) {
            second = v;
        }
    }
    out.best_score = best;
    out.second_score = second;
    return out;
}

double score_G(const KernelSpec& spec, const ObservationSet& y, const CandidateSet& b) {
    if (y.length() < 2) throw std::invalid_argument("insufficient samples: need length >= 2");
    return PairwiseKernelSums(spec, y).score(b);
}

ScoreTable score_table(const KernelSpec& spec, const ObservationSet& y, std::size_t t) {
    if (y.length() < 2) throw std::invalid_argument("insufficient samples: need length >= 2");
    return PairwiseKernelSums(spec, y).table(t);
}

}  // namespace omht
