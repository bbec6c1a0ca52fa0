#include "seampack/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace seampack {

namespace {

constexpr std::uint64_t kMaxTokenId = std::numeric_limits<Token>::max();

template <typename T>
void put_le(std::ostream& out, T value, std::size_t bytes) {
    std::array<char, 8> buf{};
    for (std::size_t i = 0; i < bytes; ++i) {
        buf[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    }
    out.write(buf.data(), static_cast<std::streamsize>(bytes));
}

std::uint64_t get_le(std::istream& in, std::size_t bytes) {
    std::array<unsigned char, 8> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
    if (in.gcount() != static_cast<std::streamsize>(bytes)) {
        throw FormatError("binary sequence file truncated");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

void check_lengths(std::span<const PackedSequence> seqs, std::size_t seq_len) {
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (seqs[i].tokens.size() != seq_len) {
            throw std::invalid_argument("sequence " + std::to_string(i) + " has " +
                                        std::to_string(seqs[i].tokens.size()) +
                                        " tokens, expected " + std::to_string(seq_len));
        }
    }
}

Token token_from_json(const nlohmann::json& v) {
    if (!v.is_number_unsigned()) {
        throw FormatError("token ids must be non-negative integers");
    }
    const auto raw = v.get<std::uint64_t>();
    if (raw > kMaxTokenId) {
        throw FormatError("token id " + std::to_string(raw) + " does not fit in 32 bits");
    }
    return static_cast<Token>(raw);
}

}  // namespace

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::sp: return "sp";
        case Strategy::ct: return "ct";
        case Strategy::ffd: return "ffd";
        case Strategy::bfd: return "bfd";
        case Strategy::bfd_m: return "bfdm";
    }
    return "?";
}

std::string_view to_string(TailPolicy p) noexcept {
    return p == TailPolicy::drop ? "drop" : "pad";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
    if (name == "sp") return Strategy::sp;
    if (name == "ct") return Strategy::ct;
    if (name == "ffd") return Strategy::ffd;
    if (name == "bfd") return Strategy::bfd;
    if (name == "bfdm" || name == "bfd-m" || name == "bfd_m") return Strategy::bfd_m;
    return std::nullopt;
}

std::optional<TailPolicy> parse_tail_policy(std::string_view name) noexcept {
    if (name == "drop") return TailPolicy::drop;
    if (name == "pad") return TailPolicy::pad;
    return std::nullopt;
}

void PackingConfig::validate() const {
    if (seq_len < 2) {
        throw ConfigError("seq_len must be at least 2 (got " + std::to_string(seq_len) + ")");
    }
    if (c_extra >= seq_len) {
        throw ConfigError("c_extra must be smaller than seq_len (got " + std::to_string(c_extra) + " >= " +
                          std::to_string(seq_len) + ")");
    }
    if (!(r_max > 0.0 && r_max <= 1.0)) {
        std::ostringstream os;
        os << "r_max must lie in (0, 1] (got " << r_max << ")";
        throw ConfigError(os.str());
    }
}

std::size_t default_c_extra(std::size_t seq_len) noexcept {
    double c = 0.0;
    if (seq_len >= 2048) {
        c = 50.0 * static_cast<double>(seq_len) / 2048.0;
    } else if (seq_len >= 512) {
        c = 10.0 + 40.0 * static_cast<double>(seq_len - 512) / 1536.0;
    } else {
        c = 10.0 * static_cast<double>(seq_len) / 512.0;
    }
    auto out = static_cast<std::size_t>(std::lround(c));
    return seq_len == 0 ? 0 : std::min(out, seq_len - 1);
}

std::uint64_t LengthHistogram::count(std::size_t k) const {
    auto it = counts.find(k);
    return it == counts.end() ? 0 : it->second;
}

std::uint64_t LengthHistogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [k, n] : counts) t += n;
    return t;
}

std::size_t LengthHistogram::max_interval() const {
    return counts.empty() ? 0 : counts.rbegin()->first;
}

LengthHistogram build_histogram(std::span<const Document> docs, std::size_t seq_len) {
    if (seq_len < 2) {
        throw ConfigError("seq_len must be at least 2");
    }
    LengthHistogram h{seq_len, {}};
    for (const auto& d : docs) {
        if (d.tokens.empty()) continue;
        ++h.counts[interval_of(d.size(), seq_len)];
    }
    return h;
}

nlohmann::json histogram_to_json(const LengthHistogram& hist) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [k, n] : hist.counts) counts[std::to_string(k)] = n;
    return {{"seq_len", hist.seq_len}, {"counts", counts}};
}

LengthHistogram histogram_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("seq_len") || !j.contains("counts")) {
        throw FormatError("histogram must be an object with \"seq_len\" and \"counts\"");
    }
    const auto& sl = j.at("seq_len");
    if (!sl.is_number_unsigned() || sl.get<std::uint64_t>() < 2) {
        throw FormatError("histogram seq_len must be an integer >= 2");
    }
    LengthHistogram h{sl.get<std::size_t>(), {}};
    const auto& counts = j.at("counts");
    if (!counts.is_object()) {
        throw FormatError("histogram counts must be an object mapping interval to count");
    }
    for (const auto& [key, value] : counts.items()) {
        std::size_t k = 0;
        try {
            std::size_t pos = 0;
            k = std::stoull(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw FormatError("histogram interval key \"" + key + "\" is not a non-negative integer");
        }
        if (!value.is_number_unsigned()) {
            throw FormatError("histogram count for interval " + key + " must be a non-negative integer");
        }
        if (value.get<std::uint64_t>() > 0) h.counts[k] = value.get<std::uint64_t>();
    }
    return h;
}

LengthHistogram read_histogram(const std::filesystem::path& path) {
    auto in = open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return histogram_from_json(j);
}

std::vector<Token> WhitespaceTokenizer::encode(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (j > i) {
            auto [it, inserted] = vocab_.try_emplace(std::string(text.substr(i, j - i)),
                                                     static_cast<Token>(vocab_.size()));
            out.push_back(it->second);
        }
        i = j;
    }
    return out;
}

IngestResult ingest_jsonl(std::istream& in) {
    IngestResult result;
    WhitespaceTokenizer tokenizer;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        const auto where = "line " + std::to_string(line_no) + ": ";
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(where + "malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object()) throw FormatError(where + "record must be a JSON object");
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
            throw FormatError(where + "missing or non-string \"id\"");
        }
        Document doc;
        doc.id = j["id"].get<std::string>();
        if (j.contains("tokens")) {
            if (!j["tokens"].is_array()) throw FormatError(where + "\"tokens\" must be an array");
            doc.tokens.reserve(j["tokens"].size());
            try {
                for (const auto& t : j["tokens"]) doc.tokens.push_back(token_from_json(t));
            } catch (const FormatError& e) {
                throw FormatError(where + e.what());
            }
        } else if (j.contains("text")) {
            if (!j["text"].is_string()) throw FormatError(where + "\"text\" must be a string");
            doc.tokens = tokenizer.encode(j["text"].get<std::string>());
        } else {
            throw FormatError(where + "record has neither \"tokens\" nor \"text\"");
        }
        if (!seen.insert(doc.id).second) {
            throw FormatError(where + "duplicate id \"" + doc.id + "\"");
        }
        if (doc.tokens.empty()) {
            ++result.skipped;
            continue;
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    return ingest_jsonl(in);
}

CorpusFingerprint fingerprint(std::span<const Document> docs) noexcept {
    CorpusFingerprint f{docs.size(), 0};
    for (const auto& d : docs) f.tokens += d.size();
    return f;
}

std::optional<SequenceFormat> parse_sequence_format(std::string_view name) noexcept {
    if (name == "jsonl") return SequenceFormat::jsonl;
    if (name == "binary" || name == "bin") return SequenceFormat::binary;
    return std::nullopt;
}

nlohmann::json sequence_to_json(const PackedSequence& seq) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : seq.segments) {
        segs.push_back({{"doc", s.doc_id}, {"start", s.start}, {"end", s.end}});
    }
    return {{"tokens", seq.tokens}, {"segments", std::move(segs)}, {"pad", seq.pad_count}};
}

PackedSequence sequence_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("tokens") || !j.contains("segments")) {
        throw FormatError("sequence record needs \"tokens\" and \"segments\"");
    }
    PackedSequence seq;
    for (const auto& t : j.at("tokens")) seq.tokens.push_back(token_from_json(t));
    for (const auto& s : j.at("segments")) {
        seq.segments.push_back({s.at("doc").get<std::string>(), s.at("start").get<std::size_t>(),
                                s.at("end").get<std::size_t>()});
    }
    seq.pad_count = j.value("pad", std::size_t{0});
    return seq;
}

void write_sequences_jsonl(std::span<const PackedSequence> seqs, std::ostream& out) {
    for (const auto& s : seqs) out << sequence_to_json(s).dump() << '\n';
}

void write_sequences_binary(std::span<const PackedSequence> seqs, std::size_t seq_len, std::ostream& out) {
    check_lengths(seqs, seq_len);
    out.write(kBinaryMagic, 4);
    put_le(out, kBinaryVersion, 1);
    put_le(out, static_cast<std::uint32_t>(seq_len), 4);
    put_le(out, static_cast<std::uint64_t>(seqs.size()), 8);
    std::vector<char> row(seq_len * 4);
    for (const auto& s : seqs) {
        for (std::size_t i = 0; i < seq_len; ++i) {
            const Token t = s.tokens[i];
            row[4 * i + 0] = static_cast<char>(t & 0xFF);
            row[4 * i + 1] = static_cast<char>((t >> 8) & 0xFF);
            row[4 * i + 2] = static_cast<char>((t >> 16) & 0xFF);
            row[4 * i + 3] = static_cast<char>((t >> 24) & 0xFF);
        }
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

void write_sequences(std::span<const PackedSequence> seqs, std::size_t seq_len,
                     const std::filesystem::path& path, SequenceFormat format) {
    check_lengths(seqs, seq_len);
    if (seq_len > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("seq_len does not fit the binary header");
    }
    std::ostringstream buf(std::ios::binary);
    if (format == SequenceFormat::jsonl) {
        write_sequences_jsonl(seqs, buf);
    } else {
        write_sequences_binary(seqs, seq_len, buf);
    }
    write_file_atomic(path, buf.str());
}

std::vector<PackedSequence> read_sequences_jsonl(std::istream& in) {
    std::vector<PackedSequence> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(sequence_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<PackedSequence> read_sequences_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_sequences_jsonl(in);
}

TokenMatrix to_matrix(std::span<const PackedSequence> seqs, std::size_t seq_len) {
    check_lengths(seqs, seq_len);
    TokenMatrix m{seq_len, seqs.size(), {}};
    m.data.reserve(seq_len * seqs.size());
    for (const auto& s : seqs) m.data.insert(m.data.end(), s.tokens.begin(), s.tokens.end());
    return m;
}

TokenMatrix read_sequences_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || !std::equal(magic, magic + 4, kBinaryMagic)) {
        throw FormatError("not a packed-sequence file (bad magic)");
    }
    const auto version = get_le(in, 1);
    if (version != kBinaryVersion) {
        throw FormatError("unsupported binary version " + std::to_string(version));
    }
    TokenMatrix m;
    m.seq_len = static_cast<std::size_t>(get_le(in, 4));
    m.rows = static_cast<std::size_t>(get_le(in, 8));
    const std::size_t n = m.seq_len * m.rows;
    std::vector<unsigned char> raw(n * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError("binary sequence file truncated");
    }
    m.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.data[i] = static_cast<Token>(raw[4 * i]) | (static_cast<Token>(raw[4 * i + 1]) << 8) |
                    (static_cast<Token>(raw[4 * i + 2]) << 16) | (static_cast<Token>(raw[4 * i + 3]) << 24);
    }
    return m;
}

TokenMatrix read_sequences_binary(const std::filesystem::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    return read_sequences_binary(in);
}

}  // namespace seampack
