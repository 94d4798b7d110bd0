#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "careflow/eventlog.hpp"

namespace careflow {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void append_row(std::span<const double> values);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Width of the demographic input: scaled age plus a one-hot insurance code.
inline constexpr std::size_t kDemographicWidth = 6;

/// [age / 100, Medicaid, Medicare, Private, SelfPay, Government].
std::array<double, kDemographicWidth> encode_demographics(const DemographicRecord& record);

/// Model-ready rows: one timed state sample, one demographic vector and
/// one 0/1 label per case.
struct PredictionDataset {
  std::vector<std::string> case_ids;
  Matrix samples;       // width 3 x |places|
  Matrix demographics;  // width kDemographicWidth
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t place_count() const { return samples.cols() / 3; }

  /// Row counts agree, labels are 0/1, every value is finite.
  void validate() const;

  /// Rows at the given positions, in that order.
  PredictionDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const PredictionDataset&) const = default;
};

/// Columns: case_id, f_0..f_{P-1}, c_0..c_{P-1}, m_0..m_{P-1}, age,
/// ins_0..ins_4, label. Values use shortest round-trip formatting.
void write_dataset_csv(std::ostream& out, const PredictionDataset& data);
PredictionDataset read_dataset_csv(std::istream& in);

}  // namespace careflow
