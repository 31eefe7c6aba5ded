#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace omht {

// M scalar sequences of equal current length n, grown one column (one new
// sample per sequence) at a time. M >= 3 throughout: the scoring function
// needs at least one pooled sequence besides the candidate and the probe.
class ObservationSet {
  public:
    explicit ObservationSet(std::size_t m) : rows_(m) {
        if (m < 3) throw std::invalid_argument("observation set needs at least 3 sequences");
    }

    static ObservationSet from_rows(std::vector<std::vector<double>> rows) {
        ObservationSet y(rows.size());
        const std::size_t n = rows.empty() ? 0 : rows.front().size();
        for (const auto& r : rows) {
            if (r.size() != n) throw std::invalid_argument("sequences must share one length");
            for (double v : r)
                if (!std::isfinite(v)) throw std::invalid_argument("observations must be finite");
        }
        y.rows_ = std::move(rows);
        return y;
    }

    std::size_t num_sequences() const { return rows_.size(); }
    std::size_t length() const { return rows_.empty() ? 0 : rows_.front().size(); }

    std::span<const double> sequence(std::size_t i) const { return rows_.at(i); }
    double value(std::size_t i, std::size_t a) const { return rows_.at(i).at(a); }

    void append_column(std::span<const double> values) {
        if (values.size() != rows_.size())
            throw std::invalid_argument("column size must equal the number of sequences");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("observations must be finite");
        for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i].push_back(values[i]);
    }

    ObservationSet prefix(std::size_t n) const {
        if (n > length()) throw std::invalid_argument("prefix longer than the data");
        ObservationSet y(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i)
            y.rows_[i].assign(rows_[i].begin(), rows_[i].begin() + static_cast<std::ptrdiff_t>(n));
        return y;
    }

  private:
    std::vector<std::vector<double>> rows_;
};

}  // namespace omht
