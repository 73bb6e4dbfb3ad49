#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace onramp {

enum class Split { train, test, application };

std::string to_string(Split s);
Split parse_split(const std::string& s);

/// Fixed assignment of the 31 recording ids to splits (8/8/15).  Ids outside
/// 1..31 are a config error (std::invalid_argument).
Split split_of(int dataset_id);

std::vector<int> train_ids();
std::vector<int> test_ids();
std::vector<int> application_ids();

/// Per-recording metadata: identity, clock, traffic statistics, split tag
/// and the estimated measurement delays.
struct DatasetInfo {
  int id = 0;
  std::string day;         // recording day label
  std::string start_time;  // clock time label, e.g. "09:40"
  double duration_s = 0.0;
  int passing_count = 0;   // vehicles through the carriageway
  int entering_count = 0;  // vehicles from the ramp
  double passing_speed_kmh = 0.0;
  double entering_speed_kmh = 0.0;
  Split split = Split::application;
  double tau2 = 0.0, tau3 = 0.0;  // [s]
};

struct SplitIds {
  std::vector<int> train, test, application;
};

/// Groups manifest rows by their split tag; duplicate ids are an error.
SplitIds split_datasets(std::span<const DatasetInfo> manifest);

// Manifest file: versioned CSV
//   # onramp dataset manifest v1
//   id,day,start,duration_s,passing,entering,v_passing_kmh,v_entering_kmh,split,tau2,tau3
void write_manifest(std::ostream& os, std::span<const DatasetInfo> rows);
std::vector<DatasetInfo> read_manifest(std::istream& is);

}  // namespace onramp
