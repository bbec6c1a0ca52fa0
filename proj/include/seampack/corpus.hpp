#pragma once

// Corpus data model: documents, packing configuration, packed sequences,
// length histograms, and the on-disk formats for all of them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace seampack {

using Token = std::uint32_t;

/// Raised for invalid PackingConfig values and bad command-line combinations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for malformed input files (corpus, histogram, sequence files).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Document {
    std::string id;
    std::vector<Token> tokens;

    std::size_t size() const noexcept { return tokens.size(); }
};

enum class Strategy { sp, ct, ffd, bfd, bfd_m };
enum class TailPolicy { drop, pad };

std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(TailPolicy p) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;
std::optional<TailPolicy> parse_tail_policy(std::string_view name) noexcept;

struct PackingConfig {
    std::size_t seq_len = 2048;
    double r_max = 0.3;
    std::size_t c_extra = 50;
    Strategy strategy = Strategy::sp;
    TailPolicy tail_policy = TailPolicy::drop;
    Token pad_token = 0;
    std::optional<Token> separator_token;

    /// Throws ConfigError unless seq_len >= 2, c_extra < seq_len and 0 < r_max <= 1.
    void validate() const;
};

/// Extra bin capacity that tracks the tuned values (50 at 2048, 10 at 512),
/// scaled linearly for other sequence lengths.
std::size_t default_c_extra(std::size_t seq_len) noexcept;

/// Source span of one contiguous run inside a packed sequence. Separator
/// tokens are recorded with an empty doc_id.
struct Segment {
    std::string doc_id;
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - start; }
    bool operator==(const Segment&) const = default;
};

struct PackedSequence {
    std::vector<Token> tokens;
    std::vector<Segment> segments;
    std::size_t pad_count = 0;

    bool operator==(const PackedSequence&) const = default;
};

/// T_k counts over length intervals (k*seq_len, (k+1)*seq_len].
struct LengthHistogram {
    std::size_t seq_len = 0;
    std::map<std::size_t, std::uint64_t> counts;

    std::uint64_t count(std::size_t k) const;
    std::uint64_t total() const;
    std::size_t max_interval() const;
};

/// Interval index of a document length; exact multiples of seq_len fall in
/// the interval below.
constexpr std::size_t interval_of(std::size_t length, std::size_t seq_len) noexcept {
    return length == 0 ? 0 : (length - 1) / seq_len;
}

LengthHistogram build_histogram(std::span<const Document> docs, std::size_t seq_len);

nlohmann::json histogram_to_json(const LengthHistogram& hist);
LengthHistogram histogram_from_json(const nlohmann::json& j);
LengthHistogram read_histogram(const std::filesystem::path& path);

/// Maps each distinct whitespace-separated word to the next sequential id.
/// Test-fixture tokenizer only.
class WhitespaceTokenizer {
public:
    std::vector<Token> encode(std::string_view text);
    std::size_t vocab_size() const noexcept { return vocab_.size(); }

private:
    std::unordered_map<std::string, Token> vocab_;
};

struct IngestResult {
    std::vector<Document> documents;
    std::size_t skipped = 0;
};

IngestResult ingest_jsonl(std::istream& in);
IngestResult ingest_jsonl(const std::filesystem::path& path);

/// Number of documents and tokens, echoed into reports.
struct CorpusFingerprint {
    std::size_t documents = 0;
    std::uint64_t tokens = 0;
};

CorpusFingerprint fingerprint(std::span<const Document> docs) noexcept;

enum class SequenceFormat { jsonl, binary };

std::optional<SequenceFormat> parse_sequence_format(std::string_view name) noexcept;

inline constexpr char kBinaryMagic[4] = {'S', 'P', 'K', 'D'};
inline constexpr std::uint8_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderBytes = 17;

nlohmann::json sequence_to_json(const PackedSequence& seq);
PackedSequence sequence_from_json(const nlohmann::json& j);

void write_sequences_jsonl(std::span<const PackedSequence> seqs, std::ostream& out);
void write_sequences_binary(std::span<const PackedSequence> seqs, std::size_t seq_len, std::ostream& out);

/// Writes atomically (temp file + rename). Every sequence must hold exactly
/// seq_len tokens; a mismatch throws before anything touches the disk.
void write_sequences(std::span<const PackedSequence> seqs, std::size_t seq_len,
                     const std::filesystem::path& path, SequenceFormat format);

std::vector<PackedSequence> read_sequences_jsonl(std::istream& in);
std::vector<PackedSequence> read_sequences_jsonl(const std::filesystem::path& path);

/// Row-major token matrix as stored by the binary format.
struct TokenMatrix {
    std::size_t seq_len = 0;
    std::size_t rows = 0;
    std::vector<Token> data;

    std::span<const Token> row(std::size_t i) const {
        return std::span<const Token>(data).subspan(i * seq_len, seq_len);
    }
    bool operator==(const TokenMatrix&) const = default;
};

TokenMatrix to_matrix(std::span<const PackedSequence> seqs, std::size_t seq_len);
TokenMatrix read_sequences_binary(std::istream& in);
TokenMatrix read_sequences_binary(const std::filesystem::path& path);

/// Writes text to path via temp file + rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace seampack
