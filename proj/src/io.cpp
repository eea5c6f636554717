#include "embedfit/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "embedfit/error.hpp"

namespace embedfit::io {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::Truncated, std::string("EMB1 payload ends inside ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::string trim_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      const auto cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::uint8_t> encode_emb1(const EmbeddingSet& set) {
  std::vector<std::uint8_t> out{'E', 'M', 'B', '1'};
  put_u32(out, kEmb1Version);
  put_u32(out, static_cast<std::uint32_t>(set.dim()));
  put_u32(out, static_cast<std::uint32_t>(set.size()));
  for (const auto& e : set) {
    if (!valid_utf8(e.name)) throw Error(ErrorCode::NonUtf8Name, "record name is not valid UTF-8");
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
  }
  for (const auto& e : set) {
    for (double x : e.vector) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  }
  return out;
}

EmbeddingSet decode_emb1(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::string magic = r.str(4, "magic");
  if (magic != "EMB1") throw Error(ErrorCode::BadMagic, "expected magic EMB1");
  const std::uint32_t version = r.u32("version");
  if (version != kEmb1Version) throw Error(ErrorCode::BadVersion, "unsupported EMB1 version " + std::to_string(version));
  const std::uint32_t dim = r.u32("header");
  const std::uint32_t count = r.u32("header");
  std::vector<std::string> names;
  names.reserve(std::min<std::size_t>(count, r.remaining() / 4));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32("name table");
    std::string name = r.str(len, "name table");
    if (!valid_utf8(name)) throw Error(ErrorCode::NonUtf8Name, "record " + std::to_string(i) + " name is not UTF-8");
    names.push_back(std::move(name));
  }
  const std::uint64_t n_values = static_cast<std::uint64_t>(count) * dim;
  if (r.remaining() < n_values * 4) throw Error(ErrorCode::Truncated, "EMB1 payload ends inside the value block");
  if (r.remaining() > n_values * 4) throw Error(ErrorCode::Truncated, "EMB1 payload has trailing bytes");
  EmbeddingSet set(dim);
  for (std::uint32_t i = 0; i < count; ++i) {
    Vec v(dim);
    for (auto& x : v) x = static_cast<double>(std::bit_cast<float>(r.u32("values")));
    set.add(std::move(names[i]), std::move(v));
  }
  return set;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Missing parent directories are created; if that fails the open below reports it.
static void ensure_parent(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
}

EmbeddingSet read_emb1(const std::filesystem::path& path) {
  try {
    return decode_emb1(read_bytes(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotFound) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_emb1(const EmbeddingSet& set, const std::filesystem::path& path) { write_bytes(path, encode_emb1(set)); }

void upsert_emb1(const std::filesystem::path& path, const std::vector<Embedding>& records) {
  if (records.empty()) return;
  EmbeddingSet existing = std::filesystem::exists(path) ? read_emb1(path) : EmbeddingSet(records.front().dim());
  require_same_dim(existing.dim(), records.front().dim(), ("records for " + path.string()).c_str());
  EmbeddingSet merged(existing.dim());
  for (const auto& e : existing) {
    bool replaced = false;
    for (const auto& r : records) {
      if (r.name == e.name) replaced = true;
    }
    if (!replaced) merged.add(e);
  }
  for (const auto& r : records) merged.add(r);
  write_emb1(merged, path);
}

std::pair<std::filesystem::path, std::string> parse_record_ref(const std::string& ref) {
  const auto pos = ref.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == ref.size()) {
    throw Error(ErrorCode::InvalidConfig, "expected <file.emb1:name>, got '" + ref + "'");
  }
  return {ref.substr(0, pos), ref.substr(pos + 1)};
}

Embedding read_record(const std::string& ref) {
  auto [path, name] = parse_record_ref(ref);
  const EmbeddingSet set = read_emb1(path);
  const auto* e = set.find(name);
  if (!e) throw Error(ErrorCode::UnresolvedName, "no record '" + name + "' in " + path.string());
  return *e;
}

LabelRows read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != "name,label") {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": header must be 'name,label'");
  }
  LabelRows rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  path.string() + ":" + std::to_string(line_no) + ": expected exactly two comma-separated fields");
    }
    std::string name = line.substr(0, comma), label = line.substr(comma + 1);
    if (name.empty() || label.empty() || !valid_utf8(name) || !valid_utf8(label)) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ":" + std::to_string(line_no) + ": empty or non-UTF-8 field");
    }
    rows.emplace_back(std::move(name), std::move(label));
  }
  return rows;
}

void write_labels(const LabelRows& rows, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "name,label\n";
  for (const auto& [name, label] : rows) {
    if (name.find(',') != std::string::npos || label.find(',') != std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "label CSV fields cannot contain commas: '" + name + "'");
    }
    out << name << ',' << label << '\n';
  }
  write_text(path, out.str());
}

LabeledImageSet attach_labels(const EmbeddingSet& set, const LabelRows& rows) {
  std::map<std::string, std::string> lookup;
  for (const auto& [name, label] : rows) {
    if (!lookup.emplace(name, label).second) throw Error(ErrorCode::DuplicateName, "label given twice for '" + name + "'");
  }
  LabeledImageSet out{set, {}};
  for (const auto& e : set) {
    auto it = lookup.find(e.name);
    if (it == lookup.end()) throw Error(ErrorCode::UnknownLabel, "no label for '" + e.name + "'");
    out.labels.push_back(it->second);
  }
  return out;
}

}  // namespace embedfit::io
