#include "sdist/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sdist/error.hpp"

namespace sdist {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + k])) << (8 * k);
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string encode_vector_file(const VectorSet& set) {
    if (set.size() > UINT32_MAX || set.dim() > UINT32_MAX) {
        throw Error(ErrorKind::InvalidArgument, "vector set too large for the vector file format");
    }
    std::string out;
    out.reserve(kVectorFileHeaderBytes + 4 * set.size() * set.dim());
    out.append(kVectorFileMagic);
    put_u32(out, static_cast<std::uint32_t>(set.size()));
    put_u32(out, static_cast<std::uint32_t>(set.dim()));
    for (double v : set.data()) {
        const auto f = static_cast<float>(v);
        if (!std::isfinite(f)) {
            throw Error(ErrorKind::InvalidArgument, "non-finite value cannot be written to a vector file");
        }
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

VectorSet decode_vector_file(std::string_view bytes) {
    if (bytes.size() < kVectorFileHeaderBytes) {
        throw Error(ErrorKind::MalformedFile,
                    fmt::format("vector file has {} bytes, header needs {}", bytes.size(), kVectorFileHeaderBytes));
    }
    if (bytes.substr(0, 4) != kVectorFileMagic) throw Error(ErrorKind::MalformedFile, "bad magic, expected SDV1");
    const std::uint64_t n = get_u32(bytes, 4);
    const std::uint64_t d = get_u32(bytes, 8);
    const std::uint64_t expected = kVectorFileHeaderBytes + 4 * n * d;
    if (bytes.size() < expected) {
        throw Error(ErrorKind::MalformedFile,
                    fmt::format("payload truncated: header declares {}x{} ({} bytes) but file has {} bytes, {} "
                                "bytes missing",
                                n, d, expected, bytes.size(), expected - bytes.size()));
    }
    if (bytes.size() > expected) {
        throw Error(ErrorKind::MalformedFile,
                    fmt::format("{} trailing bytes after a {}x{} payload", bytes.size() - expected, n, d));
    }
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float f = std::bit_cast<float>(get_u32(bytes, kVectorFileHeaderBytes + 4 * i));
        if (!std::isfinite(f)) {
            throw Error(ErrorKind::MalformedFile, fmt::format("non-finite value at row {} col {}", i / d, i % d));
        }
        data[i] = f;
    }
    return VectorSet(n, d, std::move(data));
}

VectorSet read_vector_file(const std::filesystem::path& path) {
    try {
        return decode_vector_file(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MalformedFile) {
            throw Error(ErrorKind::MalformedFile, path.string() + ": " + e.what());
        }
        throw;
    }
}

void write_vector_file(const std::filesystem::path& path, const VectorSet& set) {
    write_text_file(path, encode_vector_file(set));
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string scores_csv(std::span<const ScoredItem> scores) {
    std::string out = "id,score\n";
    for (const auto& s : scores) out += fmt::format("{},{}\n", s.id, format_real(s.score));
    return out;
}

std::vector<ScoredItem> parse_scores_csv(std::string_view text) {
    std::vector<ScoredItem> scores;
    bool header = true;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        const std::string_view line = trim(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (line.empty()) continue;
        if (header) {
            if (line != "id,score") throw Error(ErrorKind::MalformedFile, "scores CSV must start with 'id,score'");
            header = false;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw Error(ErrorKind::MalformedFile, fmt::format("scores CSV line {}: missing comma", line_no));
        }
        const std::string value(trim(line.substr(comma + 1)));
        char* end = nullptr;
        const double score = std::strtod(value.c_str(), &end);
        if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(score)) {
            throw Error(ErrorKind::MalformedFile, fmt::format("scores CSV line {}: bad score '{}'", line_no, value));
        }
        scores.push_back({std::string(trim(line.substr(0, comma))), score});
    }
    if (header) throw Error(ErrorKind::MalformedFile, "scores CSV is empty");
    return scores;
}

std::vector<ScoredItem> read_scores_csv(const std::filesystem::path& path) {
    return parse_scores_csv(read_text_file(path));
}

std::string kept_ids_text(std::span<const ScoredItem> scores, std::span<const std::size_t> kept) {
    std::string out;
    for (std::size_t i : kept) {
        out += scores[i].id;
        out += '\n';
    }
    return out;
}

std::string key_value_text(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out;
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    return out;
}

std::map<std::string, std::string> parse_key_value_text(std::string_view text) {
    std::map<std::string, std::string> out;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        const std::string_view line = trim(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error(ErrorKind::MalformedFile, "expected key=value line");
        out[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    return out;
}

}  // namespace sdist
