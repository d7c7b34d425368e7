#include "pdf_objects.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <string_view>

namespace pdfcorpus::pdf {

namespace {

constexpr int kMaxDepth = 64;
constexpr std::size_t kMaxDecodedBytes = std::size_t{64} << 20;

bool is_space(std::uint8_t c) { return c == 0 || c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' '; }

bool is_delimiter(std::uint8_t c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' || c == '}' || c == '/' ||
         c == '%';
}

bool is_regular(std::uint8_t c) { return !is_space(c) && !is_delimiter(c); }

int hex_digit(std::uint8_t c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

[[noreturn]] void fail(const char* what) { throw ParseFailure{what}; }

std::string_view as_view(std::span<const std::uint8_t> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

bool dict_type_is(const Dict& dict, std::string_view type) {
  const Object* t = dict_get(dict, "Type");
  return t && t->name() && t->name()->value == type;
}

std::vector<std::uint8_t> inflate_bytes(std::span<const std::uint8_t> in) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) fail("inflateInit");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(std::min<std::size_t>(in.size(), UINT32_MAX));
  std::vector<std::uint8_t> out;
  std::uint8_t buf[16384];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
    if (out.size() > kMaxDecodedBytes) {
      inflateEnd(&zs);
      fail("decoded stream too large");
    }
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) break;
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END && out.empty()) fail("inflate failed");
  return out;
}

std::vector<std::uint8_t> undo_png_predictor(const std::vector<std::uint8_t>& data, std::int64_t columns,
                                             std::int64_t colors, std::int64_t bits) {
  if (columns < 1 || colors < 1 || bits < 1 || columns > (1 << 20) || colors > 32 || bits > 16) {
    fail("bad predictor parameters");
  }
  const std::size_t bpp = static_cast<std::size_t>((colors * bits + 7) / 8);
  const std::size_t row_len = static_cast<std::size_t>((columns * colors * bits + 7) / 8);
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> prev(row_len, 0), cur(row_len, 0);
  std::size_t pos = 0;
  while (pos + 1 + row_len <= data.size()) {
    std::uint8_t type = data[pos++];
    for (std::size_t i = 0; i < row_len; ++i) {
      std::uint8_t raw = data[pos + i];
      std::uint8_t left = i >= bpp ? cur[i - bpp] : 0;
      std::uint8_t up = prev[i];
      std::uint8_t up_left = i >= bpp ? prev[i - bpp] : 0;
      switch (type) {
        case 0: cur[i] = raw; break;
        case 1: cur[i] = static_cast<std::uint8_t>(raw + left); break;
        case 2: cur[i] = static_cast<std::uint8_t>(raw + up); break;
        case 3: cur[i] = static_cast<std::uint8_t>(raw + (left + up) / 2); break;
        case 4: {
          int p = left + up - up_left;
          int pa = std::abs(p - left), pb = std::abs(p - up), pc = std::abs(p - up_left);
          std::uint8_t pred = (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : up_left);
          cur[i] = static_cast<std::uint8_t>(raw + pred);
          break;
        }
        default: fail("unknown PNG predictor");
      }
    }
    pos += row_len;
    out.insert(out.end(), cur.begin(), cur.end());
    std::swap(prev, cur);
  }
  return out;
}

}  // namespace

// --------------------------------------------------------------------------
// Object accessors

const Dict* Object::dict() const {
  if (auto p = std::get_if<std::shared_ptr<Dict>>(&value)) return p->get();
  if (auto s = std::get_if<Stream>(&value)) return s->dict.get();
  return nullptr;
}
const Array* Object::array() const {
  auto p = std::get_if<std::shared_ptr<Array>>(&value);
  return p ? p->get() : nullptr;
}
const std::int64_t* Object::integer() const { return std::get_if<std::int64_t>(&value); }
const Name* Object::name() const { return std::get_if<Name>(&value); }
const std::string* Object::string() const { return std::get_if<std::string>(&value); }
const Ref* Object::ref() const { return std::get_if<Ref>(&value); }
const Stream* Object::stream() const { return std::get_if<Stream>(&value); }

const Object* dict_get(const Dict& dict, std::string_view key) {
  for (const auto& [k, v] : dict) {
    if (k == key) return &v;
  }
  return nullptr;
}

// --------------------------------------------------------------------------
// Lexer

void Parser::skip_space() {
  while (pos_ < bytes_.size()) {
    std::uint8_t c = bytes_[pos_];
    if (is_space(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

std::string Parser::read_literal_string() {
  // pos_ is just past '('
  std::string out;
  int nesting = 1;
  while (pos_ < bytes_.size()) {
    std::uint8_t c = bytes_[pos_++];
    if (c == '\\') {
      if (pos_ >= bytes_.size()) break;
      std::uint8_t e = bytes_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '\r':
          if (pos_ < bytes_.size() && bytes_[pos_] == '\n') ++pos_;
          break;
        case '\n': break;
        default:
          if (e >= '0' && e <= '7') {
            int v = e - '0';
            for (int k = 0; k < 2 && pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '7'; ++k) {
              v = v * 8 + (bytes_[pos_++] - '0');
            }
            out.push_back(static_cast<char>(v & 0xFF));
          } else {
            out.push_back(static_cast<char>(e));
          }
      }
    } else if (c == '(') {
      ++nesting;
      out.push_back('(');
    } else if (c == ')') {
      if (--nesting == 0) return out;
      out.push_back(')');
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  fail("unterminated string");
}

std::string Parser::read_hex_string() {
  // pos_ is just past '<'
  std::string out;
  int pending = -1;
  while (pos_ < bytes_.size()) {
    std::uint8_t c = bytes_[pos_++];
    if (c == '>') {
      if (pending >= 0) out.push_back(static_cast<char>(pending << 4));
      return out;
    }
    if (is_space(c)) continue;
    int d = hex_digit(c);
    if (d < 0) fail("bad hex string");
    if (pending < 0) {
      pending = d;
    } else {
      out.push_back(static_cast<char>(pending << 4 | d));
      pending = -1;
    }
  }
  fail("unterminated hex string");
}

Parser::Token Parser::next_token() {
  skip_space();
  Token tok;
  if (pos_ >= bytes_.size()) return tok;
  std::uint8_t c = bytes_[pos_];
  switch (c) {
    case '<':
      if (pos_ + 1 < bytes_.size() && bytes_[pos_ + 1] == '<') {
        pos_ += 2;
        tok.kind = TokKind::DictOpen;
      } else {
        ++pos_;
        tok.kind = TokKind::String;
        tok.text = read_hex_string();
      }
      return tok;
    case '>':
      if (pos_ + 1 < bytes_.size() && bytes_[pos_ + 1] == '>') {
        pos_ += 2;
        tok.kind = TokKind::DictClose;
        return tok;
      }
      fail("stray '>'");
    case '[': ++pos_; tok.kind = TokKind::ArrayOpen; return tok;
    case ']': ++pos_; tok.kind = TokKind::ArrayClose; return tok;
    case '(':
      ++pos_;
      tok.kind = TokKind::String;
      tok.text = read_literal_string();
      return tok;
    case '/': {
      ++pos_;
      tok.kind = TokKind::Name;
      while (pos_ < bytes_.size() && is_regular(bytes_[pos_])) {
        std::uint8_t n = bytes_[pos_++];
        if (n == '#' && pos_ + 1 < bytes_.size() && hex_digit(bytes_[pos_]) >= 0 && hex_digit(bytes_[pos_ + 1]) >= 0) {
          tok.text.push_back(static_cast<char>(hex_digit(bytes_[pos_]) << 4 | hex_digit(bytes_[pos_ + 1])));
          pos_ += 2;
        } else {
          tok.text.push_back(static_cast<char>(n));
        }
      }
      return tok;
    }
    case '{':
    case '}':
    case ')': fail("unexpected delimiter");
    default: break;
  }
  std::size_t start = pos_;
  while (pos_ < bytes_.size() && is_regular(bytes_[pos_])) ++pos_;
  std::string_view word = as_view(bytes_.subspan(start, pos_ - start));
  bool numeric = !word.empty() && std::all_of(word.begin(), word.end(), [](char ch) {
    return (ch >= '0' && ch <= '9') || ch == '+' || ch == '-' || ch == '.';
  });
  if (numeric) {
    const char* b = word.data();
    const char* e = word.data() + word.size();
    if (*b == '+') ++b;
    if (word.find('.') == std::string_view::npos) {
      auto [ptr, ec] = std::from_chars(b, e, tok.integer);
      if (ec == std::errc{} && ptr == e) {
        tok.kind = TokKind::Integer;
        return tok;
      }
    }
    auto [ptr, ec] = std::from_chars(b, e, tok.real);
    if (ec == std::errc{} && ptr == e) {
      tok.kind = TokKind::Real;
      return tok;
    }
    fail("bad number");
  }
  tok.kind = TokKind::Keyword;
  tok.text = std::string(word);
  return tok;
}

// --------------------------------------------------------------------------
// Parser

bool Parser::try_keyword(std::string_view keyword) {
  skip_space();
  if (pos_ + keyword.size() > bytes_.size()) return false;
  if (as_view(bytes_.subspan(pos_, keyword.size())) != keyword) return false;
  std::size_t after = pos_ + keyword.size();
  if (after < bytes_.size() && is_regular(bytes_[after])) return false;
  pos_ = after;
  return true;
}

std::optional<std::int64_t> Parser::try_integer() {
  std::size_t save = pos_;
  try {
    Token t = next_token();
    if (t.kind == TokKind::Integer) return t.integer;
  } catch (const ParseFailure&) {
  }
  pos_ = save;
  return std::nullopt;
}

Object Parser::parse_object(int depth) { return parse_from(next_token(), depth); }

Object Parser::parse_from(Token tok, int depth) {
  if (depth > kMaxDepth) fail("nesting too deep");
  Object obj;
  switch (tok.kind) {
    case TokKind::End: fail("unexpected end of data");
    case TokKind::Integer: {
      std::size_t save = pos_;
      if (auto gen = try_integer()) {
        if (try_keyword("R")) {
          obj.value = Ref{tok.integer, *gen};
          return obj;
        }
      }
      pos_ = save;
      obj.value = tok.integer;
      return obj;
    }
    case TokKind::Real: obj.value = tok.real; return obj;
    case TokKind::Name: obj.value = Name{std::move(tok.text)}; return obj;
    case TokKind::String: obj.value = std::move(tok.text); return obj;
    case TokKind::ArrayOpen: {
      auto arr = std::make_shared<Array>();
      for (;;) {
        Token t = next_token();
        if (t.kind == TokKind::ArrayClose) break;
        if (t.kind == TokKind::End) fail("unterminated array");
        arr->push_back(parse_from(std::move(t), depth + 1));
      }
      obj.value = std::move(arr);
      return obj;
    }
    case TokKind::DictOpen: {
      auto dict = std::make_shared<Dict>();
      for (;;) {
        Token key = next_token();
        if (key.kind == TokKind::DictClose) break;
        if (key.kind != TokKind::Name) fail("dictionary key is not a name");
        Object value = parse_object(depth + 1);
        dict->emplace_back(std::move(key.text), std::move(value));
      }
      obj.value = std::move(dict);
      return obj;
    }
    case TokKind::Keyword:
      if (tok.text == "true") { obj.value = true; return obj; }
      if (tok.text == "false") { obj.value = false; return obj; }
      if (tok.text == "null") return obj;
      fail("unexpected keyword");
    case TokKind::DictClose:
    case TokKind::ArrayClose: fail("unexpected closing delimiter");
  }
  fail("unreachable");
}

std::pair<Ref, Object> Parser::parse_indirect(
    const std::function<std::optional<std::int64_t>(const Object&)>& resolve_length) {
  auto num = try_integer();
  auto gen = num ? try_integer() : std::nullopt;
  if (!num || !gen || !try_keyword("obj")) fail("missing object header");
  Object obj = parse_object();
  if (auto dict = std::get_if<std::shared_ptr<Dict>>(&obj.value); dict && try_keyword("stream")) {
    if (pos_ < bytes_.size() && bytes_[pos_] == '\r') ++pos_;
    if (pos_ < bytes_.size() && bytes_[pos_] == '\n') ++pos_;
    Stream s;
    s.dict = *dict;
    s.data_begin = pos_;
    std::optional<std::int64_t> length;
    if (const Object* len = dict_get(**dict, "Length")) length = resolve_length(*len);
    bool resolved = false;
    if (length && *length >= 0 && static_cast<std::uint64_t>(*length) <= bytes_.size() - pos_) {
      Parser probe(bytes_, pos_ + static_cast<std::size_t>(*length));
      if (probe.try_keyword("endstream")) {
        s.data_end = pos_ + static_cast<std::size_t>(*length);
        pos_ = probe.pos();
        resolved = true;
      }
    }
    if (!resolved) {
      std::string_view rest = as_view(bytes_.subspan(pos_));
      auto end = rest.find("endstream");
      if (end == std::string_view::npos) fail("unterminated stream");
      std::size_t data_end = pos_ + end;
      if (data_end > s.data_begin && bytes_[data_end - 1] == '\n') --data_end;
      if (data_end > s.data_begin && bytes_[data_end - 1] == '\r') --data_end;
      s.data_end = data_end;
      pos_ += end + std::strlen("endstream");
    }
    obj.value = std::move(s);
  }
  return {Ref{*num, *gen}, std::move(obj)};
}

// --------------------------------------------------------------------------
// Document

Document::Document(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

void Document::merge_trailer(const Dict& dict) {
  for (const auto& [k, v] : dict) {
    if (!dict_get(trailer_, k)) trailer_.emplace_back(k, v);
  }
}

bool Document::load_xref() {
  try {
    std::string_view text = as_view(bytes_);
    auto at = text.rfind("startxref");
    if (at == std::string_view::npos) return false;
    Parser p(bytes_, at + std::strlen("startxref"));
    auto offset = p.try_integer();
    if (!offset || *offset < 0 || static_cast<std::uint64_t>(*offset) >= bytes_.size()) return false;
    std::set<std::size_t> visited;
    load_section(static_cast<std::size_t>(*offset), visited, 0);
    return !xref_.empty() && dict_get(trailer_, "Root") != nullptr;
  } catch (const ParseFailure&) {
    return false;
  }
}

void Document::load_section(std::size_t offset, std::set<std::size_t>& visited, int depth) {
  if (depth > kMaxDepth || offset >= bytes_.size() || !visited.insert(offset).second) return;
  Parser p(bytes_, offset);
  std::optional<std::size_t> prev;
  if (p.try_keyword("xref")) {
    for (;;) {
      auto start = p.try_integer();
      if (!start) break;
      auto count = p.try_integer();
      if (!count || *start < 0 || *count < 0 || *count > static_cast<std::int64_t>(bytes_.size())) {
        fail("bad xref subsection");
      }
      for (std::int64_t i = 0; i < *count; ++i) {
        auto off = p.try_integer();
        auto gen = p.try_integer();
        if (!off || !gen) fail("bad xref entry");
        bool in_use = p.try_keyword("n");
        if (!in_use && !p.try_keyword("f")) fail("bad xref entry type");
        std::int64_t num = *start + i;
        if (in_use && *off >= 0 && !xref_.contains(num)) {
          xref_[num] = XrefEntry{XrefEntry::Kind::Offset, static_cast<std::size_t>(*off), 0, 0};
        } else if (!in_use && !xref_.contains(num)) {
          // free entries shadow older definitions of the same number
          xref_[num] = XrefEntry{XrefEntry::Kind::Offset, SIZE_MAX, 0, 0};
        }
      }
    }
    if (!p.try_keyword("trailer")) fail("missing trailer");
    Object dict = p.parse_object();
    if (!dict.dict()) fail("trailer is not a dictionary");
    merge_trailer(*dict.dict());
    if (const Object* xs = dict_get(*dict.dict(), "XRefStm"); xs && xs->integer() && *xs->integer() >= 0) {
      load_section(static_cast<std::size_t>(*xs->integer()), visited, depth + 1);
    }
    if (const Object* pv = dict_get(*dict.dict(), "Prev"); pv && pv->integer() && *pv->integer() >= 0) {
      prev = static_cast<std::size_t>(*pv->integer());
    }
  } else {
    auto [ref, obj] = p.parse_indirect([this](const Object& len) -> std::optional<std::int64_t> {
      if (len.integer()) return *len.integer();
      return std::nullopt;
    });
    const Stream* s = obj.stream();
    if (!s || !dict_type_is(*s->dict, "XRef")) fail("startxref does not point at xref data");
    load_xref_stream(*s);
    merge_trailer(*s->dict);
    if (const Object* pv = dict_get(*s->dict, "Prev"); pv && pv->integer() && *pv->integer() >= 0) {
      prev = static_cast<std::size_t>(*pv->integer());
    }
  }
  if (prev) load_section(*prev, visited, depth + 1);
}

void Document::load_xref_stream(const Stream& stream) {
  const Dict& dict = *stream.dict;
  const Object* w = dict_get(dict, "W");
  if (!w || !w->array() || w->array()->size() != 3) fail("xref stream lacks /W");
  std::int64_t widths[3];
  for (int i = 0; i < 3; ++i) {
    const auto* v = (*w->array())[i].integer();
    if (!v || *v < 0 || *v > 8) fail("bad /W entry");
    widths[i] = *v;
  }
  std::vector<std::int64_t> index;
  if (const Object* idx = dict_get(dict, "Index"); idx && idx->array()) {
    for (const auto& v : *idx->array()) {
      if (!v.integer()) fail("bad /Index");
      index.push_back(*v.integer());
    }
  } else {
    const Object* size = dict_get(dict, "Size");
    if (!size || !size->integer()) fail("xref stream lacks /Size");
    index = {0, *size->integer()};
  }
  if (index.size() % 2 != 0) fail("odd /Index");
  std::vector<std::uint8_t> data = decode_stream(stream);
  const std::size_t entry_len = static_cast<std::size_t>(widths[0] + widths[1] + widths[2]);
  if (entry_len == 0) fail("zero-width xref entries");
  std::size_t pos = 0;
  auto field = [&](std::int64_t width) {
    std::uint64_t v = 0;
    for (std::int64_t i = 0; i < width; ++i) v = (v << 8) | data[pos++];
    return v;
  };
  for (std::size_t s = 0; s < index.size(); s += 2) {
    std::int64_t start = index[s], count = index[s + 1];
    if (start < 0 || count < 0) fail("negative /Index");
    for (std::int64_t i = 0; i < count; ++i) {
      if (pos + entry_len > data.size()) return;
      std::uint64_t type = widths[0] == 0 ? 1 : field(widths[0]);
      std::uint64_t f2 = field(widths[1]);
      std::uint64_t f3 = field(widths[2]);
      std::int64_t num = start + i;
      if (xref_.contains(num)) continue;
      if (type == 1) {
        xref_[num] = XrefEntry{XrefEntry::Kind::Offset, static_cast<std::size_t>(f2), 0, 0};
      } else if (type == 2) {
        xref_[num] = XrefEntry{XrefEntry::Kind::Compressed, 0, static_cast<std::int64_t>(f2),
                               static_cast<std::int64_t>(f3)};
      } else if (type == 0) {
        xref_[num] = XrefEntry{XrefEntry::Kind::Offset, SIZE_MAX, 0, 0};
      }
    }
  }
}

std::vector<std::uint8_t> Document::decode_stream(const Stream& stream, int depth) {
  if (stream.data_end < stream.data_begin || stream.data_end > bytes_.size()) fail("bad stream bounds");
  std::vector<std::uint8_t> data(bytes_.begin() + static_cast<std::ptrdiff_t>(stream.data_begin),
                                 bytes_.begin() + static_cast<std::ptrdiff_t>(stream.data_end));
  const Dict& dict = *stream.dict;
  std::vector<std::string> filters;
  if (const Object* f = dict_get(dict, "Filter")) {
    Object filter = resolve(*f, depth + 1);
    if (filter.name()) {
      filters.push_back(filter.name()->value);
    } else if (filter.array()) {
      for (const auto& item : *filter.array()) {
        if (!item.name()) fail("bad /Filter");
        filters.push_back(item.name()->value);
      }
    }
  }
  if (filters.size() > 1) fail("filter chains unsupported");
  if (filters.empty()) return data;
  if (filters[0] != "FlateDecode" && filters[0] != "Fl") fail("unsupported filter");
  data = inflate_bytes(data);
  if (const Object* parms = dict_get(dict, "DecodeParms")) {
    Object p = resolve(*parms, depth + 1);
    if (p.array() && !p.array()->empty()) p = (*p.array())[0];
    if (p.dict()) {
      auto int_param = [&](const char* key, std::int64_t fallback) {
        const Object* v = dict_get(*p.dict(), key);
        return v && v->integer() ? *v->integer() : fallback;
      };
      std::int64_t predictor = int_param("Predictor", 1);
      if (predictor >= 10) {
        data = undo_png_predictor(data, int_param("Columns", 1), int_param("Colors", 1),
                                  int_param("BitsPerComponent", 8));
      } else if (predictor != 1) {
        fail("unsupported predictor");
      }
    }
  }
  return data;
}

Object Document::resolve(const Object& obj, int depth) {
  if (depth > 32) fail("reference chain too long");
  if (const Ref* r = obj.ref()) {
    auto target = object(r->num, depth + 1);
    if (!target) return Object{};
    return resolve(*target, depth + 1);
  }
  return obj;
}

std::optional<Object> Document::object(std::int64_t num, int depth) {
  if (depth > 32) fail("object nesting too deep");
  if (auto it = cache_.find(num); it != cache_.end()) return it->second;
  auto it = xref_.find(num);
  if (it == xref_.end()) return std::nullopt;
  if (in_progress_.contains(num)) fail("circular object reference");
  in_progress_.insert(num);
  std::optional<Object> result;
  try {
    const XrefEntry entry = it->second;
    if (entry.kind == XrefEntry::Kind::Compressed) {
      result = object_from_stream(entry.stream_num, entry.index, depth);
    } else if (entry.offset < bytes_.size()) {
      Parser p(bytes_, entry.offset);
      auto [ref, parsed] = p.parse_indirect([this, depth](const Object& len) -> std::optional<std::int64_t> {
        Object v = resolve(len, depth + 1);
        if (v.integer()) return *v.integer();
        return std::nullopt;
      });
      if (ref.num == num) result = std::move(parsed);
    }
  } catch (...) {
    in_progress_.erase(num);
    throw;
  }
  in_progress_.erase(num);
  if (result) cache_[num] = *result;
  return result;
}

std::optional<Object> Document::object_from_stream(std::int64_t stream_num, std::int64_t index, int depth) {
  auto container = object(stream_num, depth + 1);
  if (!container || !container->stream()) return std::nullopt;
  const Dict& d = *container->stream()->dict;
  const Object* first_obj = dict_get(d, "First");
  const Object* n_obj = dict_get(d, "N");
  if (!first_obj || !first_obj->integer() || !n_obj || !n_obj->integer()) fail("object stream lacks /First or /N");
  const std::int64_t first = *first_obj->integer();
  const std::int64_t n = *n_obj->integer();

  std::shared_ptr<std::vector<std::uint8_t>> data;
  if (auto it = objstm_cache_.find(stream_num); it != objstm_cache_.end()) {
    data = it->second;
  } else {
    data = std::make_shared<std::vector<std::uint8_t>>(decode_stream(*container->stream(), depth + 1));
    objstm_cache_[stream_num] = data;
  }
  if (index < 0 || index >= n || first < 0 || static_cast<std::uint64_t>(first) > data->size()) return std::nullopt;
  Parser header(*data, 0);
  std::int64_t offset = -1;
  for (std::int64_t i = 0; i <= index; ++i) {
    auto num = header.try_integer();
    auto off = header.try_integer();
    if (!num || !off) return std::nullopt;
    if (i == index) offset = *off;
  }
  if (offset < 0 || static_cast<std::uint64_t>(first + offset) >= data->size()) return std::nullopt;
  Parser body(*data, static_cast<std::size_t>(first + offset));
  return body.parse_object();
}

void Document::reconstruct() {
  reconstructed_ = true;
  xref_.clear();
  trailer_.clear();
  cache_.clear();
  objstm_cache_.clear();
  in_progress_.clear();

  std::string_view text = as_view(bytes_);
  // "num gen obj" headers; later definitions shadow earlier ones.
  for (std::size_t at = text.find("obj"); at != std::string_view::npos; at = text.find("obj", at + 3)) {
    std::size_t after = at + 3;
    if (after < text.size() && is_regular(bytes_[after])) continue;
    std::size_t i = at;
    auto skip_back_space = [&] {
      std::size_t n = 0;
      while (i > 0 && is_space(bytes_[i - 1])) { --i; ++n; }
      return n;
    };
    auto skip_back_digits = [&] {
      std::size_t n = 0;
      while (i > 0 && bytes_[i - 1] >= '0' && bytes_[i - 1] <= '9') { --i; ++n; }
      return n;
    };
    if (skip_back_space() == 0 || skip_back_digits() == 0 || skip_back_space() == 0) continue;
    std::size_t num_end = i;
    if (skip_back_digits() == 0 || num_end - i > 12) continue;
    if (i > 0 && is_regular(bytes_[i - 1])) continue;
    std::int64_t num = 0;
    std::from_chars(text.data() + i, text.data() + num_end, num);
    xref_[num] = XrefEntry{XrefEntry::Kind::Offset, i, 0, 0};
  }

  std::vector<std::size_t> trailers;
  for (std::size_t at = text.find("trailer"); at != std::string_view::npos; at = text.find("trailer", at + 7)) {
    trailers.push_back(at + 7);
  }
  for (auto it = trailers.rbegin(); it != trailers.rend(); ++it) {
    try {
      Parser p(bytes_, *it);
      Object dict = p.parse_object();
      if (dict.dict()) merge_trailer(*dict.dict());
    } catch (const ParseFailure&) {
    }
  }

  std::vector<std::int64_t> direct;
  for (const auto& [num, entry] : xref_) direct.push_back(num);
  std::sort(direct.begin(), direct.end(),
            [this](std::int64_t a, std::int64_t b) { return xref_[a].offset > xref_[b].offset; });
  std::vector<std::int64_t> object_streams;
  std::optional<std::int64_t> catalog;
  for (std::int64_t num : direct) {
    std::optional<Object> obj;
    try {
      obj = object(num);
    } catch (const ParseFailure&) {
      continue;
    }
    if (!obj || !obj->dict()) continue;
    const Dict& d = *obj->dict();
    if (obj->stream() && dict_type_is(d, "XRef")) merge_trailer(d);
    if (obj->stream() && dict_type_is(d, "ObjStm")) object_streams.push_back(num);
    if (!catalog && dict_type_is(d, "Catalog")) catalog = num;
  }
  for (std::int64_t stm : object_streams) {
    try {
      auto container = object(stm);
      const Dict& d = *container->stream()->dict;
      const Object* n = dict_get(d, "N");
      if (!n || !n->integer()) continue;
      auto data = decode_stream(*container->stream());
      Parser header(data, 0);
      for (std::int64_t i = 0; i < *n->integer(); ++i) {
        auto num = header.try_integer();
        auto off = header.try_integer();
        if (!num || !off) break;
        if (!xref_.contains(*num)) xref_[*num] = XrefEntry{XrefEntry::Kind::Compressed, 0, stm, i};
      }
    } catch (const ParseFailure&) {
    }
  }
  if (!dict_get(trailer_, "Root")) {
    if (!catalog) {
      for (const auto& [num, entry] : xref_) {
        if (entry.kind != XrefEntry::Kind::Compressed) continue;
        try {
          auto obj = object(num);
          if (obj && obj->dict() && dict_type_is(*obj->dict(), "Catalog")) {
            catalog = num;
            break;
          }
        } catch (const ParseFailure&) {
        }
      }
    }
    if (catalog) trailer_.emplace_back("Root", Object{Ref{*catalog, 0}});
  }
}

std::size_t Document::count_page_objects() {
  std::size_t pages = 0;
  std::vector<std::int64_t> nums;
  for (const auto& [num, entry] : xref_) nums.push_back(num);
  for (std::int64_t num : nums) {
    try {
      auto obj = object(num);
      if (obj && obj->dict() && dict_type_is(*obj->dict(), "Page")) ++pages;
    } catch (const ParseFailure&) {
    }
  }
  return pages;
}

}  // namespace pdfcorpus::pdf
