#include "careflow/dataset.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace careflow {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw std::invalid_argument("row width " + std::to_string(values.size()) +
                                " does not match matrix width " + std::to_string(cols_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::array<double, kDemographicWidth> encode_demographics(const DemographicRecord& record) {
  std::array<double, kDemographicWidth> out{};
  out[0] = static_cast<double>(record.age) / 100.0;
  out[1 + static_cast<std::size_t>(record.insurance)] = 1.0;
  return out;
}

void PredictionDataset::validate() const {
  const auto n = labels.size();
  if (case_ids.size() != n || samples.rows() != n || demographics.rows() != n) {
    throw DataError("dataset row counts disagree");
  }
  if (samples.cols() % 3 != 0) throw DataError("sample width is not a multiple of 3");
  if (n > 0 && demographics.cols() != kDemographicWidth) {
    throw DataError("demographic width must be " + std::to_string(kDemographicWidth));
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] != 0 && labels[r] != 1) throw DataError("labels must be 0 or 1");
    for (const double v : samples.row(r)) {
      if (!std::isfinite(v)) throw DataError("non-finite sample value in row " + case_ids[r]);
    }
    for (const double v : demographics.row(r)) {
      if (!std::isfinite(v)) throw DataError("non-finite demographic value in row " + case_ids[r]);
    }
  }
}

PredictionDataset PredictionDataset::subset(std::span<const std::size_t> rows) const {
  PredictionDataset out;
  out.samples = Matrix(0, samples.cols());
  out.demographics = Matrix(0, demographics.cols());
  for (const auto r : rows) {
    out.case_ids.push_back(case_ids.at(r));
    out.samples.append_row(samples.row(r));
    out.demographics.append_row(demographics.row(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const PredictionDataset& data) {
  const std::size_t places = data.place_count();
  out << "case_id";
  for (const char* prefix : {"f_", "c_", "m_"}) {
    for (std::size_t p = 0; p < places; ++p) out << ',' << prefix << p;
  }
  out << ",age";
  for (std::size_t i = 0; i + 1 < kDemographicWidth; ++i) out << ",ins_" << i;
  out << ",label\n";
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << csv_escape(data.case_ids[r]);
    for (const double v : data.samples.row(r)) out << ',' << format_double(v);
    for (const double v : data.demographics.row(r)) out << ',' << format_double(v);
    out << ',' << data.labels[r] << '\n';
  }
}

PredictionDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset: empty input");
  const auto header = split_csv_line(chomp(line));
  // case_id + 3P + 6 + label
  const std::size_t fixed = 1 + kDemographicWidth + 1;
  if (header.size() < fixed || (header.size() - fixed) % 3 != 0 || header.front() != "case_id" ||
      header.back() != "label") {
    throw DataError("dataset line 1: unexpected header");
  }
  const std::size_t places = (header.size() - fixed) / 3;
  for (std::size_t p = 0; p < places; ++p) {
    if (header[1 + p] != "f_" + std::to_string(p) ||
        header[1 + places + p] != "c_" + std::to_string(p) ||
        header[1 + 2 * places + p] != "m_" + std::to_string(p)) {
      throw DataError("dataset line 1: unexpected column order");
    }
  }
  if (header[1 + 3 * places] != "age") throw DataError("dataset line 1: missing age column");

  PredictionDataset data;
  data.samples = Matrix(0, 3 * places);
  data.demographics = Matrix(0, kDemographicWidth);
  std::vector<double> sample(3 * places), demo(kDemographicWidth);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = chomp(line);
    if (text.empty()) continue;
    const auto fields = split_csv_line(text);
    auto fail = [&](const std::string& what) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != header.size()) fail("wrong field count");
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (!parse_double(fields[1 + i], sample[i])) fail("bad number '" + fields[1 + i] + "'");
    }
    for (std::size_t i = 0; i < demo.size(); ++i) {
      const auto& f = fields[1 + sample.size() + i];
      if (!parse_double(f, demo[i])) fail("bad number '" + f + "'");
    }
    std::int64_t label = 0;
    if (!parse_int64(fields.back(), label) || (label != 0 && label != 1)) fail("bad label");
    data.case_ids.push_back(fields[0]);
    data.samples.append_row(sample);
    data.demographics.append_row(demo);
    data.labels.push_back(static_cast<int>(label));
  }
  data.validate();
  return data;
}

}  // namespace careflow
