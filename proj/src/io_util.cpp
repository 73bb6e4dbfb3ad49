#include "onramp/io_util.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "onramp/version.hpp"

namespace onramp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " is not `key = value`: " + trim(line));
    const std::string key = trim(body.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  " has an empty key");
    out.set(key, trim(body.substr(eq + 1)));
  }
  return out;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  return parse(is);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key `" + key + "` is not a number: " + *v);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const int i = std::stoi(*v, &used);
    if (used != v->size()) throw std::invalid_argument("");
    return i;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key `" + key + "` is not an integer: " + *v);
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw std::invalid_argument("config key `" + key + "` is not a boolean: " + *v);
}

std::uint64_t KeyValueConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  const auto feed = [&h](const std::string& s) {
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
  };
  for (const auto& [key, value] : entries_) {
    feed(key);
    feed("=");
    feed(value);
    feed("\n");
  }
  return h;
}

void KeyValueConfig::write(std::ostream& os) const {
  for (const auto& [key, value] : entries_) os << key << " = " << value << '\n';
}

std::string artifact_header(const KeyValueConfig& config, std::uint64_t seed) {
  std::ostringstream os;
  os << "# onramp " << kVersion << " config_hash=" << std::hex;
  os.width(16);
  os.fill('0');
  os << config.hash() << std::dec << " seed=" << seed;
  return os.str();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
  return is;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

void ensure_directory(const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec)
    throw std::runtime_error("cannot create directory " + path.string() + ": " +
                             ec.message());
}

}  // namespace onramp
