#include "test_helpers.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace careflow::testing {

EventLog make_log(std::vector<Trace> traces) {
  EventLog log;
  std::sort(traces.begin(), traces.end(),
            [](const Trace& a, const Trace& b) { return a.case_id < b.case_id; });
  std::set<std::string> names;
  for (const auto& t : traces) {
    for (const auto& e : t.events) names.insert(e.event);
  }
  log.traces = std::move(traces);
  log.vocabulary.assign(names.begin(), names.end());
  return log;
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = base / ("careflow-test-" + std::to_string(rd()) + "-" +
                             std::to_string(counter++));
    if (std::filesystem::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CAREFLOW_FIXTURE_DIR) / name;
}

}  // namespace careflow::testing
