#include "onramp/manifest.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace onramp {

namespace {
constexpr int kTrainIds[] = {1, 4, 10, 11, 16, 19, 20, 30};
constexpr int kTestIds[] = {6, 8, 14, 15, 21, 22, 24, 26};
}  // namespace

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::application: return "application";
  }
  throw std::logic_error("unreachable");
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "application") return Split::application;
  throw std::invalid_argument("unknown split tag: " + s);
}

Split split_of(int dataset_id) {
  if (dataset_id < 1 || dataset_id > 31)
    throw std::invalid_argument("dataset id must lie in 1..31");
  if (std::count(std::begin(kTrainIds), std::end(kTrainIds), dataset_id))
    return Split::train;
  if (std::count(std::begin(kTestIds), std::end(kTestIds), dataset_id))
    return Split::test;
  return Split::application;
}

namespace {
std::vector<int> ids_with(Split split) {
  std::vector<int> out;
  for (int id = 1; id <= 31; ++id)
    if (split_of(id) == split) out.push_back(id);
  return out;
}
}  // namespace

std::vector<int> train_ids() { return ids_with(Split::train); }
std::vector<int> test_ids() { return ids_with(Split::test); }
std::vector<int> application_ids() { return ids_with(Split::application); }

SplitIds split_datasets(std::span<const DatasetInfo> manifest) {
  std::set<int> seen;
  SplitIds out;
  for (const auto& row : manifest) {
    if (!seen.insert(row.id).second)
      throw std::invalid_argument("duplicate dataset id in manifest");
    switch (row.split) {
      case Split::train: out.train.push_back(row.id); break;
      case Split::test: out.test.push_back(row.id); break;
      case Split::application: out.application.push_back(row.id); break;
    }
  }
  return out;
}

void write_manifest(std::ostream& os, std::span<const DatasetInfo> rows) {
  os << "# onramp dataset manifest v1\n";
  os << "id,day,start,duration_s,passing,entering,v_passing_kmh,"
        "v_entering_kmh,split,tau2,tau3\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.id << ',' << r.day << ',' << r.start_time << ',' << r.duration_s
       << ',' << r.passing_count << ',' << r.entering_count << ','
       << r.passing_speed_kmh << ',' << r.entering_speed_kmh << ','
       << to_string(r.split) << ',' << r.tau2 << ',' << r.tau3 << '\n';
  }
}

std::vector<DatasetInfo> read_manifest(std::istream& is) {
  std::string line;
  // Run-metadata comments may precede the version line.
  bool versioned = false;
  while (std::getline(is, line)) {
    if (line.rfind("# onramp dataset manifest v1", 0) == 0) {
      versioned = true;
      break;
    }
    if (line.empty() || line[0] == '#') continue;
    break;
  }
  if (!versioned)
    throw std::runtime_error("not a dataset manifest (missing version header)");
  if (!std::getline(is, line) || line.rfind("id,", 0) != 0)
    throw std::runtime_error("dataset manifest misses the column header");
  std::vector<DatasetInfo> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 11)
      throw std::runtime_error("manifest row must have 11 columns");
    DatasetInfo r;
    r.id = std::stoi(fields[0]);
    r.day = fields[1];
    r.start_time = fields[2];
    r.duration_s = std::stod(fields[3]);
    r.passing_count = std::stoi(fields[4]);
    r.entering_count = std::stoi(fields[5]);
    r.passing_speed_kmh = std::stod(fields[6]);
    r.entering_speed_kmh = std::stod(fields[7]);
    r.split = parse_split(fields[8]);
    r.tau2 = std::stod(fields[9]);
    r.tau3 = std::stod(fields[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace onramp
