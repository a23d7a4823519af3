#include "bellrand/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "bellrand/errors.hpp"

namespace bellrand::io {

using json = nlohmann::json;

namespace {

constexpr std::array<const char*, 4> kRowLabels = {"00", "01", "10", "11"};
constexpr std::array<const char*, 4> kColLabels = {"++", "+0", "0+", "00"};
constexpr const char* kCsvHeader = "x,y,a,b";

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_u64_le(const unsigned char* bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

std::string csv_line(const TrialRecord& t) {
  std::string line;
  line += static_cast<char>('0' + t.x);
  line += ',';
  line += static_cast<char>('0' + t.y);
  line += ',';
  line += outcome_symbol(t.a);
  line += ',';
  line += outcome_symbol(t.b);
  line += '\n';
  return line;
}

TrialRecord parse_csv_line(std::string_view line, std::uint64_t offset) {
  line = trim(line);
  if (line.size() != 7 || line[1] != ',' || line[3] != ',' || line[5] != ',') {
    throw ParseError("malformed trial line '" + std::string(line) + "'", offset);
  }
  auto setting = [&](char c, std::uint64_t at) -> std::uint8_t {
    if (c == '0' || c == '1') return static_cast<std::uint8_t>(c - '0');
    throw ParseError(std::string("invalid setting symbol '") + c + "'", at);
  };
  auto outcome = [&](char c, std::uint64_t at) -> std::uint8_t {
    if (c == '+') return 1;
    if (c == '0') return 0;
    throw ParseError(std::string("invalid outcome symbol '") + c + "'", at);
  };
  TrialRecord t;
  t.x = setting(line[0], offset);
  t.y = setting(line[2], offset + 2);
  t.a = outcome(line[4], offset + 4);
  t.b = outcome(line[6], offset + 6);
  return t;
}

json cells_to_json(const CellArray& c) {
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(c(r, k));
    rows.push_back(row);
  }
  return rows;
}

CellArray cells_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("cell table must have 4 rows");
  CellArray c;
  for (int r = 0; r < 4; ++r) {
    if (!j[r].is_array() || j[r].size() != 4) throw ParseError("cell table row must have 4 entries");
    for (int k = 0; k < 4; ++k) c(r, k) = j[r][k].get<double>();
  }
  return c;
}

json spec_to_json(const ExtractorSpec& s) {
  return json{{"q", s.q},
              {"t", s.t},
              {"eps_1bit", s.eps_1bit},
              {"w", s.w},
              {"d", s.d},
              {"field_degree", s.field_degree},
              {"modulus", {{"degree", s.modulus.degree}, {"terms", s.modulus.terms}}},
              {"block_sizes", s.block_sizes}};
}

ExtractorSpec spec_from_json(const json& j) {
  ExtractorSpec s;
  s.q = j.at("q").get<std::uint64_t>();
  s.t = j.at("t").get<std::uint64_t>();
  s.eps_1bit = j.at("eps_1bit").get<double>();
  s.w = j.at("w").get<std::uint64_t>();
  s.d = j.at("d").get<std::uint64_t>();
  s.field_degree = j.at("field_degree").get<unsigned>();
  s.modulus.degree = j.at("modulus").at("degree").get<unsigned>();
  s.modulus.terms = j.at("modulus").at("terms").get<std::vector<unsigned>>();
  s.block_sizes = j.at("block_sizes").get<std::vector<std::uint64_t>>();
  return s;
}

json plan_body(const PlanRecord& p) {
  const auto& pp = p.params;
  return json{{"format", "bellrand-plan-1"},
              {"n", pp.n},
              {"log_v_thresh", pp.log_v_thresh},
              {"eps_fin", p.eps_fin},
              {"eps_p", pp.eps_p},
              {"eps_ext", pp.eps_ext},
              {"kappa", pp.kappa},
              {"m", pp.m},
              {"m_raw", p.m_raw},
              {"t", pp.t},
              {"neg_log2_delta", pp.neg_log2_delta},
              {"sigma", pp.sigma},
              {"eps_1bit", pp.eps_1bit},
              {"q", pp.q},
              {"d", pp.d},
              {"alpha", p.alpha},
              {"quantile_z", p.quantile_z},
              {"v_thresh_override", p.v_thresh_override},
              {"threshold", {{"log_v_thresh", p.threshold.log_v_thresh},
                             {"mu", p.threshold.mu},
                             {"sigma", p.threshold.sigma},
                             {"no_expected_violation", p.threshold.no_expected_violation}}},
              {"bell_function", cells_to_json(p.t_values)},
              {"expected_log_t", p.expected_log_t},
              {"rate", p.rate},
              {"train", p.train},
              {"extractor", spec_to_json(p.extractor)},
              {"q_sha256", p.q_sha256}};
}

std::string hash_of_body(const json& body) { return sha256_hex(body.dump()); }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + " is not valid JSON: " + e.what(), e.byte);
  }
}

}  // namespace

// Trials ------------------------------------------------------------------

std::uint8_t pack_trial(const TrialRecord& t) {
  return static_cast<std::uint8_t>((t.x << 3) | (t.y << 2) | (t.a << 1) | t.b);
}

TrialRecord unpack_trial(std::uint8_t byte, std::uint64_t offset) {
  if (byte & 0xF0) throw ParseError("reserved trial bits set", offset);
  TrialRecord t;
  t.x = (byte >> 3) & 1;
  t.y = (byte >> 2) & 1;
  t.a = (byte >> 1) & 1;
  t.b = byte & 1;
  return t;
}

TrialFormat format_for_path(const fs::path& path) {
  return path.extension() == ".csv" ? TrialFormat::csv : TrialFormat::binary;
}

void write_trials(const fs::path& path, std::span<const TrialRecord> trials) {
  write_trials(path, trials, format_for_path(path));
}

void write_trials(const fs::path& path, std::span<const TrialRecord> trials, TrialFormat format) {
  TrialWriter writer(path, format);
  writer.write(trials);
  writer.close();
}

std::vector<TrialRecord> read_trials(const fs::path& path) {
  TrialReader reader(path);
  std::vector<TrialRecord> out;
  if (reader.size()) out.reserve(*reader.size());
  for (auto chunk = reader.next(1 << 20); !chunk.empty(); chunk = reader.next(1 << 20)) {
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

TrialWriter::TrialWriter(const fs::path& path, TrialFormat format) : out_(open_out(path)), format_(format) {
  if (format_ == TrialFormat::binary) {
    out_.write(kTrialMagic, 8);
    put_u64_le(out_, 0);
  } else {
    out_ << kCsvHeader << '\n';
  }
}

TrialWriter::~TrialWriter() {
  if (open_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void TrialWriter::write(std::span<const TrialRecord> trials) {
  if (!open_) throw InputError("trial writer is closed");
  if (format_ == TrialFormat::binary) {
    std::vector<char> bytes(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
      validate_trial(trials[i], count_ + i);
      bytes[i] = static_cast<char>(pack_trial(trials[i]));
    }
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  } else {
    std::string text;
    text.reserve(8 * trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
      validate_trial(trials[i], count_ + i);
      text += csv_line(trials[i]);
    }
    out_ << text;
  }
  count_ += trials.size();
}

void TrialWriter::close() {
  if (!open_) return;
  open_ = false;
  if (format_ == TrialFormat::binary) {
    out_.seekp(8);
    put_u64_le(out_, count_);
  }
  out_.close();
  if (!out_) throw InputError("failed writing trial file");
}

TrialReader::TrialReader(const fs::path& path) : path_(path), in_(open_in(path)) {
  char head[8] = {};
  in_.read(head, 8);
  const auto got = in_.gcount();
  if (got == 8 && std::memcmp(head, kTrialMagic, 8) == 0) {
    format_ = TrialFormat::binary;
    unsigned char count_bytes[8];
    in_.read(reinterpret_cast<char*>(count_bytes), 8);
    if (in_.gcount() != 8) throw ParseError("truncated trial header", 8 + static_cast<std::uint64_t>(in_.gcount()));
    const std::uint64_t count = get_u64_le(count_bytes);
    const std::uint64_t file_size = fs::file_size(path);
    if (file_size < kTrialHeaderBytes + count) {
      throw ParseError("truncated payload: header declares " + std::to_string(count) + " trials", file_size);
    }
    if (file_size > kTrialHeaderBytes + count) {
      throw ParseError("trailing bytes after the declared trials", kTrialHeaderBytes + count);
    }
    size_ = count;
    byte_offset_ = kTrialHeaderBytes;
    return;
  }
  in_.clear();
  in_.seekg(0);
  std::string header;
  std::getline(in_, header);
  if (trim(header) != kCsvHeader) {
    if (got == 8) throw ParseError("bad magic: not a trial file", 0);
    throw ParseError("bad magic: not a trial file", static_cast<std::uint64_t>(got));
  }
  format_ = TrialFormat::csv;
  byte_offset_ = header.size() + 1;
}

std::vector<TrialRecord> TrialReader::next(std::size_t max) {
  std::vector<TrialRecord> out;
  if (format_ == TrialFormat::binary) {
    const std::uint64_t remaining = *size_ - position_;
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, max));
    std::vector<unsigned char> bytes(take);
    in_.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(take));
    if (static_cast<std::size_t>(in_.gcount()) != take) {
      throw ParseError("truncated payload", byte_offset_ + static_cast<std::uint64_t>(in_.gcount()));
    }
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(unpack_trial(bytes[i], byte_offset_ + i));
    byte_offset_ += take;
    position_ += take;
    return out;
  }
  std::string line;
  while (out.size() < max && std::getline(in_, line)) {
    const std::uint64_t offset = byte_offset_;
    byte_offset_ += line.size() + 1;
    if (trim(line).empty()) continue;
    out.push_back(parse_csv_line(line, offset));
  }
  position_ += out.size();
  return out;
}

void TrialReader::skip(std::uint64_t count) {
  if (format_ == TrialFormat::binary) {
    if (count > *size_ - position_) throw ParseError("file ends before the skipped trials", fs::file_size(path_));
    seek(position_ + count);
    return;
  }
  while (count > 0) {
    const auto chunk = next(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1 << 20)));
    if (chunk.empty()) throw ParseError("file ends before the skipped trials", byte_offset_);
    count -= chunk.size();
  }
}

void TrialReader::seek(std::uint64_t index) {
  if (format_ != TrialFormat::binary) throw InputError("random access needs a binary trial file");
  if (index > *size_) throw InputError("trial index past end of file");
  position_ = index;
  byte_offset_ = kTrialHeaderBytes + index;
  in_.clear();
  in_.seekg(static_cast<std::streamoff>(byte_offset_));
}

// Tables --------------------------------------------------------------------

TableFile parse_table(const std::string& text) {
  TableFile table;
  std::uint64_t offset = 0;
  int rows_read = 0;
  bool header_seen = false;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const std::uint64_t line_offset = offset;
    offset += raw.size() + 1;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("xy", 0) == 0) {
        const auto cols = split_ws(line);
        if (cols.size() != 5) throw ParseError("table header needs 4 outcome columns", line_offset);
        for (int k = 0; k < 4; ++k) {
          if (cols[k + 1] != kColLabels[k]) {
            throw ParseError("table columns must be ++ +0 0+ 00 in that order", line_offset);
          }
        }
        header_seen = true;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value' or the table header", line_offset);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key == "kind") {
        table.kind = value;
      } else {
        table.metadata[key] = value;
      }
      continue;
    }
    if (rows_read == 4) throw ParseError("table has more than 4 rows", line_offset);
    const auto cells = split_ws(line);
    if (cells.size() != 5) {
      throw ParseError("table row has " + std::to_string(cells.empty() ? 0 : cells.size() - 1) +
                           " entries, expected 4",
                       line_offset);
    }
    if (cells[0] != kRowLabels[rows_read]) {
      throw ParseError("expected row xy = " + std::string(kRowLabels[rows_read]), line_offset);
    }
    for (int k = 0; k < 4; ++k) {
      const auto v = parse_double(cells[k + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("invalid number '" + std::string(cells[k + 1]) + "'", line_offset);
      }
      table.values(rows_read, k) = *v;
    }
    ++rows_read;
  }
  if (table.kind.empty()) throw ParseError("table has no 'kind' entry");
  if (!header_seen || rows_read != 4) throw ParseError("table needs a header and 4 rows", offset);
  return table;
}

std::string format_table(const TableFile& table) {
  std::ostringstream out;
  out << "kind = " << table.kind << '\n';
  for (const auto& [key, value] : table.metadata) out << key << " = " << value << '\n';
  out << "\nxy";
  for (const char* c : kColLabels) out << ' ' << c;
  out << '\n';
  for (int r = 0; r < 4; ++r) {
    out << kRowLabels[r];
    for (int k = 0; k < 4; ++k) out << ' ' << format_double(table.values(r, k));
    out << '\n';
  }
  return out.str();
}

TableFile read_table_file(const fs::path& path) { return parse_table(read_text(path)); }

void write_table_file(const fs::path& path, const TableFile& table) { write_text(path, format_table(table)); }

namespace {

void require_kind(const TableFile& t, const char* kind, const fs::path& path) {
  if (t.kind != kind) {
    throw ParseError(path.string() + ": expected a " + kind + " table, found '" + t.kind + "'");
  }
}

bool meta_flag(const TableFile& t, const std::string& key, bool fallback) {
  const auto it = t.metadata.find(key);
  if (it == t.metadata.end()) return fallback;
  if (it->second == "true") return true;
  if (it->second == "false") return false;
  throw ParseError("metadata '" + key + "' must be true or false");
}

double meta_number(const TableFile& t, const std::string& key, std::optional<double> fallback) {
  const auto it = t.metadata.find(key);
  if (it == t.metadata.end()) {
    if (fallback) return *fallback;
    throw ParseError("table lacks the '" + key + "' entry");
  }
  const auto v = parse_double(it->second);
  if (!v) throw ParseError("metadata '" + key + "' is not a number");
  return *v;
}

}  // namespace

CountTable read_count_table(const fs::path& path) {
  const auto t = read_table_file(path);
  require_kind(t, "counts", path);
  CountArray c;
  for (int r = 0; r < 4; ++r) {
    for (int k = 0; k < 4; ++k) {
      const double v = t.values(r, k);
      if (v != std::floor(v) || v > 9.0e15) throw ParseError("count table entries must be integers");
      c(r, k) = static_cast<std::int64_t>(v);
    }
  }
  try {
    return CountTable(c);
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": count table invalid: " + e.what());
  }
}

JointDistribution read_distribution(const fs::path& path) {
  const auto t = read_table_file(path);
  require_kind(t, "distribution", path);
  JointDistribution::Flags flags;
  flags.uniform_settings = meta_flag(t, "uniform_settings", true);
  flags.nonsignaling = meta_flag(t, "nonsignaling", true);
  try {
    return JointDistribution(t.values, flags);
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": distribution invalid: " + e.what());
  }
}

BellFunction read_bell_function(const fs::path& path) {
  const auto t = read_table_file(path);
  require_kind(t, "bell-function", path);
  try {
    return BellFunction(t.values, meta_number(t, "m", std::nullopt), meta_number(t, "alpha", 0.0));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": Bell function invalid: " + e.what());
  }
}

void write_count_table(const fs::path& path, const CountTable& counts, const std::string& provenance) {
  TableFile t;
  t.kind = "counts";
  if (!provenance.empty()) t.metadata["provenance"] = provenance;
  t.values = counts.counts().cast<double>();
  write_table_file(path, t);
}

void write_distribution(const fs::path& path, const JointDistribution& q, const std::string& provenance) {
  TableFile t;
  t.kind = "distribution";
  if (!provenance.empty()) t.metadata["provenance"] = provenance;
  t.metadata["uniform_settings"] = q.flags().uniform_settings ? "true" : "false";
  t.metadata["nonsignaling"] = q.flags().nonsignaling ? "true" : "false";
  t.values = q.table();
  write_table_file(path, t);
}

void write_bell_function(const fs::path& path, const BellFunction& f, const std::string& provenance) {
  TableFile t;
  t.kind = "bell-function";
  if (!provenance.empty()) t.metadata["provenance"] = provenance;
  t.metadata["m"] = format_double(f.m());
  t.metadata["alpha"] = format_double(f.alpha());
  t.values = f.values();
  write_table_file(path, t);
}

bool is_trial_file(const fs::path& path) {
  std::string head(8, '\0');
  auto in = open_in(path);
  in.read(head.data(), 8);
  head.resize(static_cast<std::size_t>(in.gcount()));
  return head == std::string(kTrialMagic, 8) || head.rfind(kCsvHeader, 0) == 0;
}

CountTable load_counts(const fs::path& path, std::optional<std::uint64_t> limit) {
  if (!is_trial_file(path)) {
    if (limit) throw InputError("a trial limit applies to trial files only");
    return read_count_table(path);
  }
  TrialReader reader(path);
  if (limit && reader.size() && *limit > *reader.size()) {
    throw InputError("requested " + std::to_string(*limit) + " trials but the file holds " +
                     std::to_string(*reader.size()));
  }
  CountArray counts = CountArray::Zero();
  std::uint64_t remaining = limit.value_or(std::numeric_limits<std::uint64_t>::max());
  while (remaining > 0) {
    const auto chunk = reader.next(static_cast<std::size_t>(std::min<std::uint64_t>(remaining, 1 << 20)));
    if (chunk.empty()) break;
    for (const auto& t : chunk) ++counts(t.row(), t.col());
    remaining -= chunk.size();
  }
  if (limit && remaining > 0) {
    throw InputError("requested " + std::to_string(*limit) + " trials but the file ends early");
  }
  return CountTable(counts);
}

// Hashing and bits ------------------------------------------------------------

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

fs::path sidecar_path(const fs::path& path) { return fs::path(path.string() + ".json"); }

void write_bits(const fs::path& path, const BitVector& bits, const std::map<std::string, std::string>& extra) {
  const auto bytes = bits.to_bytes();
  {
    auto out = open_out(path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing " + path.string());
  }
  json side{{"bits", bits.size()}, {"sha256", sha256_hex(bytes)}, {"bit_order", "little-endian"}};
  for (const auto& [k, v] : extra) side[k] = v;
  write_text(sidecar_path(path), side.dump(2) + "\n");
}

std::optional<BitFileInfo> read_sidecar(const fs::path& path) {
  const auto side = sidecar_path(path);
  if (!fs::exists(side)) return std::nullopt;
  const json j = parse_json(read_text(side), "bit sidecar");
  BitFileInfo info;
  info.bits = j.at("bits").get<std::uint64_t>();
  info.sha256 = j.value("sha256", "");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_string() && it.key() != "sha256") info.extra[it.key()] = it.value().get<std::string>();
  }
  return info;
}

BitVector read_bits(const fs::path& path, std::optional<std::uint64_t> expected_bits) {
  const std::string raw = read_text(path);
  const std::span bytes(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());
  std::uint64_t bits = 8 * static_cast<std::uint64_t>(raw.size());
  if (const auto info = read_sidecar(path)) {
    bits = info->bits;
    if (!info->sha256.empty() && info->sha256 != sha256_hex(bytes)) {
      throw ParseError(path.string() + ": content does not match its sidecar hash");
    }
    if (expected_bits && *expected_bits != bits) {
      throw InputError(path.string() + " holds " + std::to_string(bits) + " bits, expected " +
                       std::to_string(*expected_bits));
    }
  } else if (expected_bits) {
    bits = *expected_bits;
  }
  if ((bits + 7) / 8 != raw.size()) {
    throw ParseError(path.string() + ": file size does not match " + std::to_string(bits) + " bits", raw.size());
  }
  return BitVector::from_bytes(bytes, bits);
}

// Protocol records ------------------------------------------------------------

std::string plan_hash(const PlanRecord& plan) { return hash_of_body(plan_body(plan)); }

std::string extractor_spec_hash(const ExtractorSpec& spec) { return sha256_hex(spec_to_json(spec).dump()); }

std::string plan_to_json(const PlanRecord& plan) {
  json body = plan_body(plan);
  const std::string hash = hash_of_body(body);
  body["sha256"] = hash;
  return body.dump(2) + "\n";
}

PlanRecord plan_from_json(const std::string& text) {
  json j = parse_json(text, "plan");
  if (!j.contains("sha256")) throw ParseError("plan has no sha256 field");
  const std::string stored = j["sha256"].get<std::string>();
  j.erase("sha256");
  if (hash_of_body(j) != stored) throw ParseError("plan hash mismatch: parameters changed after planning");
  try {
    PlanRecord p;
    auto& pp = p.params;
    pp.n = j.at("n").get<std::uint64_t>();
    pp.log_v_thresh = j.at("log_v_thresh").get<double>();
    pp.eps_p = j.at("eps_p").get<double>();
    pp.eps_ext = j.at("eps_ext").get<double>();
    pp.kappa = j.at("kappa").get<double>();
    pp.m = j.at("m").get<double>();
    pp.t = j.at("t").get<std::uint64_t>();
    pp.neg_log2_delta = j.at("neg_log2_delta").get<double>();
    pp.sigma = j.at("sigma").get<double>();
    pp.eps_1bit = j.at("eps_1bit").get<double>();
    pp.q = j.at("q").get<std::uint64_t>();
    pp.d = j.at("d").get<std::uint64_t>();
    p.eps_fin = j.at("eps_fin").get<double>();
    p.m_raw = j.at("m_raw").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.quantile_z = j.at("quantile_z").get<double>();
    p.v_thresh_override = j.at("v_thresh_override").get<bool>();
    const auto& th = j.at("threshold");
    p.threshold.log_v_thresh = th.at("log_v_thresh").get<double>();
    p.threshold.mu = th.at("mu").get<double>();
    p.threshold.sigma = th.at("sigma").get<double>();
    p.threshold.no_expected_violation = th.at("no_expected_violation").get<bool>();
    p.t_values = cells_from_json(j.at("bell_function"));
    p.expected_log_t = j.at("expected_log_t").get<double>();
    p.rate = j.at("rate").get<double>();
    p.train = j.at("train").get<std::uint64_t>();
    p.extractor = spec_from_json(j.at("extractor"));
    p.q_sha256 = j.at("q_sha256").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan record malformed: ") + e.what());
  }
}

void write_plan(const fs::path& path, const PlanRecord& plan) { write_text(path, plan_to_json(plan)); }

PlanRecord read_plan(const fs::path& path) { return plan_from_json(read_text(path)); }

std::string certificate_to_json(const CertificateRecord& c) {
  const auto& r = c.run;
  json j{{"format", "bellrand-certificate-1"},
         {"n", r.n},
         {"log_v", r.log_v},
         {"log_v_thresh", r.log_v_thresh},
         {"crossing_index", r.crossing_index ? json(*r.crossing_index) : json(nullptr)},
         {"crossing_known", r.crossing_known},
         {"frozen", r.frozen},
         {"passed", r.passed},
         {"marginal", r.marginal},
         {"adaptive", c.adaptive},
         {"first_trial", c.first_trial},
         {"plan_sha256", c.plan_sha256},
         {"trials_path", c.trials_path}};
  return j.dump(2) + "\n";
}

CertificateRecord certificate_from_json(const std::string& text) {
  const json j = parse_json(text, "certificate");
  try {
    CertificateRecord c;
    c.run.n = j.at("n").get<std::uint64_t>();
    c.run.log_v = j.at("log_v").get<double>();
    c.run.log_v_thresh = j.at("log_v_thresh").get<double>();
    if (!j.at("crossing_index").is_null()) c.run.crossing_index = j.at("crossing_index").get<std::uint64_t>();
    c.run.crossing_known = j.at("crossing_known").get<bool>();
    c.run.frozen = j.at("frozen").get<bool>();
    c.run.passed = j.at("passed").get<bool>();
    c.run.marginal = j.at("marginal").get<bool>();
    c.adaptive = j.at("adaptive").get<bool>();
    c.first_trial = j.at("first_trial").get<std::uint64_t>();
    c.plan_sha256 = j.at("plan_sha256").get<std::string>();
    c.trials_path = j.at("trials_path").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("certificate malformed: ") + e.what());
  }
}

void write_certificate(const fs::path& path, const CertificateRecord& cert) {
  write_text(path, certificate_to_json(cert));
}

CertificateRecord read_certificate(const fs::path& path) { return certificate_from_json(read_text(path)); }

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace bellrand::io
