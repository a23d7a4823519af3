#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bellrand/bits.hpp"
#include "bellrand/core.hpp"
#include "bellrand/entropy.hpp"
#include "bellrand/extractor.hpp"
#include "bellrand/soundness.hpp"
#include "bellrand/stats.hpp"

namespace bellrand::io {

namespace fs = std::filesystem;

// Trials ------------------------------------------------------------------

inline constexpr char kTrialMagic[8] = {'B', 'E', 'L', 'L', 'T', 'R', 'L', '1'};
inline constexpr std::uint64_t kTrialHeaderBytes = 16;

enum class TrialFormat { binary, csv };

/// x<<3 | y<<2 | a<<1 | b.
std::uint8_t pack_trial(const TrialRecord& trial);
/// Throws ParseError (with `offset`) when reserved bits are set.
TrialRecord unpack_trial(std::uint8_t byte, std::uint64_t offset);

/// Binary by default; a ".csv" extension selects the text form.
TrialFormat format_for_path(const fs::path& path);

void write_trials(const fs::path& path, std::span<const TrialRecord> trials);
void write_trials(const fs::path& path, std::span<const TrialRecord> trials, TrialFormat format);
std::vector<TrialRecord> read_trials(const fs::path& path);

/// Incremental writer; the binary header count is patched on close().
class TrialWriter {
 public:
  TrialWriter(const fs::path& path, TrialFormat format);
  ~TrialWriter();
  TrialWriter(const TrialWriter&) = delete;
  TrialWriter& operator=(const TrialWriter&) = delete;

  void write(std::span<const TrialRecord> trials);
  void close();
  std::uint64_t written() const noexcept { return count_; }

 private:
  std::ofstream out_;
  TrialFormat format_;
  std::uint64_t count_ = 0;
  bool open_ = true;
};

/// Sequential chunked reader. Binary files also support random access by
/// trial index, so disjoint ranges can be read by independent readers.
class TrialReader {
 public:
  explicit TrialReader(const fs::path& path);

  TrialFormat format() const noexcept { return format_; }
  /// Trial count when known up front (binary files).
  std::optional<std::uint64_t> size() const noexcept { return size_; }
  std::uint64_t position() const noexcept { return position_; }

  /// Up to `max` further trials; empty at end of file.
  std::vector<TrialRecord> next(std::size_t max);
  /// Skips `count` trials; ParseError if the file ends first.
  void skip(std::uint64_t count);
  /// Binary only.
  void seek(std::uint64_t index);

 private:
  fs::path path_;
  std::ifstream in_;
  TrialFormat format_;
  std::optional<std::uint64_t> size_;
  std::uint64_t position_ = 0;
  std::uint64_t byte_offset_ = 0;
};

// Tables --------------------------------------------------------------------

/// 4x4 text table with a key = value metadata block. Rows are xy = 00, 01, 10, 11
/// and columns ab = ++, +0, 0+, 00.
struct TableFile {
  std::string kind;  // counts | distribution | bell-function
  std::map<std::string, std::string> metadata;
  CellArray values = CellArray::Zero();
};

TableFile parse_table(const std::string& text);
std::string format_table(const TableFile& table);
TableFile read_table_file(const fs::path& path);
void write_table_file(const fs::path& path, const TableFile& table);

CountTable read_count_table(const fs::path& path);
/// Invariants are checked according to the `uniform_settings` and
/// `nonsignaling` metadata keys (both default to true).
JointDistribution read_distribution(const fs::path& path);
BellFunction read_bell_function(const fs::path& path);

void write_count_table(const fs::path& path, const CountTable& counts, const std::string& provenance = {});
void write_distribution(const fs::path& path, const JointDistribution& q, const std::string& provenance = {});
void write_bell_function(const fs::path& path, const BellFunction& t, const std::string& provenance = {});

/// True for binary or CSV trial files (by content, not extension).
bool is_trial_file(const fs::path& path);

/// Counts from either a table file or a trial file (first `limit` trials).
CountTable load_counts(const fs::path& path, std::optional<std::uint64_t> limit = std::nullopt);

// Hashing and bits ------------------------------------------------------------

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

struct BitFileInfo {
  std::uint64_t bits = 0;
  std::string sha256;  // of the packed bytes
  std::map<std::string, std::string> extra;
};

fs::path sidecar_path(const fs::path& path);
/// Raw little-endian-bit file plus a JSON sidecar recording length and hashes.
void write_bits(const fs::path& path, const BitVector& bits, const std::map<std::string, std::string>& extra = {});
/// Length from the sidecar when present, else `expected_bits`, else 8 x file size.
BitVector read_bits(const fs::path& path, std::optional<std::uint64_t> expected_bits = std::nullopt);
std::optional<BitFileInfo> read_sidecar(const fs::path& path);

// Protocol records ------------------------------------------------------------

struct PlanRecord {
  ProtocolParams params;
  double eps_fin = 0.0;
  double alpha = 0.0;
  double quantile_z = kDefaultThresholdQuantile;
  bool v_thresh_override = false;
  ThresholdChoice threshold;
  CellArray t_values = CellArray::Ones();
  double m_raw = 0.0;
  double expected_log_t = 0.0;
  double rate = 0.0;
  std::uint64_t train = 0;  // trials set aside before the protocol trials
  ExtractorSpec extractor;
  std::string q_sha256;

  BellFunction bell_function() const { return BellFunction(t_values, params.m, alpha); }
};

/// Canonical JSON text including a "sha256" field over the rest of the record.
std::string plan_to_json(const PlanRecord& plan);
/// Verifies the embedded hash; ParseError if the record was altered.
PlanRecord plan_from_json(const std::string& text);
void write_plan(const fs::path& path, const PlanRecord& plan);
PlanRecord read_plan(const fs::path& path);
/// The hash stored in a plan file (identifies the frozen parameters).
std::string plan_hash(const PlanRecord& plan);
std::string extractor_spec_hash(const ExtractorSpec& spec);

struct CertificateRecord {
  EntropyRun run;
  bool adaptive = false;
  std::uint64_t first_trial = 0;  // 0-based index of the first protocol trial in the file
  std::string plan_sha256;
  std::string trials_path;
};

std::string certificate_to_json(const CertificateRecord& cert);
CertificateRecord certificate_from_json(const std::string& text);
void write_certificate(const fs::path& path, const CertificateRecord& cert);
CertificateRecord read_certificate(const fs::path& path);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace bellrand::io
