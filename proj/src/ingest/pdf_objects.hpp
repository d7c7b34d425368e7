#pragma once

// Minimal PDF object model and reader: enough structure to walk the
// cross-reference data, the trailer and the page tree. Content streams are
// never interpreted.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace pdfcorpus::pdf {

struct ParseFailure {
  const char* what;
};

struct Null {};
struct Name {
  std::string value;
};
struct Ref {
  std::int64_t num = 0;
  std::int64_t gen = 0;
};

struct Object;
using Array = std::vector<Object>;
using Dict = std::vector<std::pair<std::string, Object>>;

struct Stream {
  std::shared_ptr<Dict> dict;
  std::size_t data_begin = 0;  // offsets into the owning byte buffer
  std::size_t data_end = 0;
};

struct Object {
  std::variant<Null, bool, std::int64_t, double, Name, std::string, std::shared_ptr<Array>, std::shared_ptr<Dict>,
               Ref, Stream>
      value = Null{};

  const Dict* dict() const;  // dict or stream dictionary
  const Array* array() const;
  const std::int64_t* integer() const;
  const Name* name() const;
  const std::string* string() const;
  const Ref* ref() const;
  const Stream* stream() const;
};

const Object* dict_get(const Dict& dict, std::string_view key);

/// Lexer + object parser over a byte buffer.
class Parser {
 public:
  Parser(std::span<const std::uint8_t> bytes, std::size_t pos) : bytes_(bytes), pos_(pos) {}

  Object parse_object(int depth = 0);
  /// Parses "num gen obj <object> [stream ... endstream]" at the current position.
  std::pair<Ref, Object> parse_indirect(const std::function<std::optional<std::int64_t>(const Object&)>& resolve_length);

  bool try_keyword(std::string_view keyword);
  std::optional<std::int64_t> try_integer();
  void skip_space();
  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }
  bool at_end() { skip_space(); return pos_ >= bytes_.size(); }

 private:
  enum class TokKind { End, Integer, Real, Name, String, DictOpen, DictClose, ArrayOpen, ArrayClose, Keyword };
  struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    std::int64_t integer = 0;
    double real = 0;
  };

  Token next_token();
  std::string read_literal_string();
  std::string read_hex_string();
  Object parse_from(Token tok, int depth);

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

struct XrefEntry {
  enum class Kind { Offset, Compressed } kind = Kind::Offset;
  std::size_t offset = 0;
  std::int64_t stream_num = 0;
  std::int64_t index = 0;
};

/// Random-access object reader backed by the cross-reference data, with a
/// linear-scan reconstruction when that data is unusable.
class Document {
 public:
  explicit Document(std::span<const std::uint8_t> bytes);

  /// Loads xref sections from startxref. Returns false when the chain is
  /// unusable; the reader then falls back to `reconstruct()`.
  bool load_xref();
  void reconstruct();

  const Dict& trailer() const { return trailer_; }
  bool reconstructed() const { return reconstructed_; }

  Object resolve(const Object& obj, int depth = 0);
  std::optional<Object> object(std::int64_t num, int depth = 0);

  /// Number of live objects whose dictionary has /Type /Page.
  std::size_t count_page_objects();

  std::vector<std::uint8_t> decode_stream(const Stream& stream, int depth = 0);

 private:
  void load_section(std::size_t offset, std::set<std::size_t>& visited, int depth);
  void load_xref_stream(const Stream& stream);
  void merge_trailer(const Dict& dict);
  std::optional<Object> object_from_stream(std::int64_t stream_num, std::int64_t index, int depth);

  std::span<const std::uint8_t> bytes_;
  std::map<std::int64_t, XrefEntry> xref_;
  Dict trailer_;
  bool reconstructed_ = false;
  std::map<std::int64_t, Object> cache_;
  std::set<std::int64_t> in_progress_;
  std::map<std::int64_t, std::shared_ptr<std::vector<std::uint8_t>>> objstm_cache_;
};

}  // namespace pdfcorpus::pdf
