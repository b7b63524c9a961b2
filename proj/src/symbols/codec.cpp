#include "symguide/symbols/codec.hpp"

#include <cctype>
#include <charconv>
#include <set>
#include <vector>

namespace symguide::symbols {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

class LineCursor {
 public:
  LineCursor(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool try_consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!try_consume(c)) {
      fail(std::string("expected '") + c + "'" + found());
    }
  }
  std::string_view ident() {
    skip_ws();
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    if (begin == pos_) fail("expected identifier" + found());
    return text_.substr(begin, pos_ - begin);
  }
  int integer() {
    skip_ws();
    const std::size_t begin = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text_.data() + begin, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || begin == pos_) {
      pos_ = begin;
      fail("expected integer" + found());
    }
    return value;
  }
  Point point() {
    expect('(');
    Point p;
    p.x = integer();
    expect(',');
    p.y = integer();
    expect(')');
    return p;
  }
  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(line_, message); }

 private:
  std::string found() const {
    if (pos_ >= text_.size()) return ", found end of line";
    return std::string(", found '") + text_[pos_] + "' at column " + std::to_string(pos_ + 1);
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

template <class E>
E enum_value(LineCursor& cur, std::optional<E> (*from)(std::string_view), std::string_view key) {
  const std::string_view token = cur.ident();
  auto value = from(token);
  if (!value) {
    cur.fail("invalid value '" + std::string(token) + "' for " + std::string(key));
  }
  return *value;
}

SymbolSet parse_header(std::string_view line, int line_no) {
  LineCursor cur(line, line_no);
  SymbolSet set;
  bool have_frame = false;
  bool have_purpose = false;
  while (!cur.at_end()) {
    const std::string_view key = cur.ident();
    cur.expect('=');
    if (key == "frame" && !have_frame) {
      set.frame_index = cur.integer();
      have_frame = true;
    } else if (key == "purpose" && !have_purpose) {
      set.purpose = enum_value<SetPurpose>(cur, purpose_from_token, key);
      have_purpose = true;
    } else {
      cur.fail("unexpected header key '" + std::string(key) + "'");
    }
  }
  if (!have_frame || !have_purpose) {
    cur.fail("header must contain frame=<int> and purpose=<avoidance|correction>");
  }
  return set;
}

SymbolInstance parse_symbol(std::string_view line, int line_no, int frame_index) {
  LineCursor cur(line, line_no);
  const std::string_view kind_token = cur.ident();
  const auto kind = kind_from_token(kind_token);
  if (!kind) cur.fail("unknown symbol kind '" + std::string(kind_token) + "'");

  SymbolInstance s;
  s.kind = *kind;
  s.frame_index = frame_index;
  bool have_start = false;
  std::set<std::string, std::less<>> seen;

  cur.expect('(');
  if (!cur.try_consume(')')) {
    do {
      const std::string_view key = cur.ident();
      if (!seen.insert(std::string(key)).second) {
        cur.fail("duplicate field '" + std::string(key) + "'");
      }
      cur.expect('=');
      if (key == "arm") {
        s.arm = enum_value<Arm>(cur, arm_from_token, key);
      } else if (key == "color") {
        s.color = enum_value<AxisColor>(cur, color_from_token, key);
      } else if (key == "rotation") {
        s.rotation_dir = enum_value<RotationDir>(cur, rotation_from_token, key);
      } else if (key == "state") {
        s.gripper_state = enum_value<GripperState>(cur, gripper_state_from_token, key);
      } else if (key == "mag") {
        s.magnitude = enum_value<Magnitude>(cur, magnitude_from_token, key);
      } else if (key == "start") {
        s.start = cur.point();
        have_start = true;
      } else if (key == "end") {
        s.end = cur.point();
      } else {
        cur.fail("unknown field '" + std::string(key) + "'");
      }
    } while (cur.try_consume(','));
    cur.expect(')');
  }
  if (!cur.at_end()) cur.fail("trailing characters after ')'");
  if (!have_start) {
    throw SemanticError("line " + std::to_string(line_no) + ": " +
                        std::string(to_token(s.kind)) + " missing start");
  }
  return s;
}

void append_point(std::string& out, const char* key, Point p) {
  out += key;
  out += "=(";
  out += std::to_string(p.x);
  out += ',';
  out += std::to_string(p.y);
  out += ')';
}

}  // namespace

SymbolSet parse_symbol_code(std::string_view code, std::optional<FrameDims> dims) {
  std::vector<std::pair<int, std::string_view>> lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= code.size()) {
    std::size_t nl = code.find('\n', pos);
    if (nl == std::string_view::npos) nl = code.size();
    std::string_view line = code.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (line.find_first_not_of(" \t") != std::string_view::npos) {
      lines.emplace_back(line_no, line);
    }
    pos = nl + 1;
  }
  if (lines.empty()) throw SyntaxError(1, "missing header line");

  SymbolSet set = parse_header(lines.front().second, lines.front().first);
  std::vector<int> symbol_lines;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    set.symbols.push_back(parse_symbol(lines[i].second, lines[i].first, set.frame_index));
    symbol_lines.push_back(lines[i].first);
  }

  const auto violations = validate_symbols(set, dims);
  for (const auto& v : violations) {
    if (v.severity != Severity::Error) continue;
    const int at = v.symbol_index ? symbol_lines[*v.symbol_index] : lines.front().first;
    throw SemanticError("line " + std::to_string(at) + ": " + std::string(to_token(v.code)) +
                        ": " + v.message);
  }
  return set;
}

std::string emit_symbol_line(const SymbolInstance& s) {
  std::string out(to_token(s.kind));
  out += "(arm=";
  out += to_token(s.arm);
  if (s.color) {
    out += ", color=";
    out += to_token(*s.color);
  }
  if (s.rotation_dir) {
    out += ", rotation=";
    out += to_token(*s.rotation_dir);
  }
  if (s.gripper_state) {
    out += ", state=";
    out += to_token(*s.gripper_state);
  }
  out += ", ";
  append_point(out, "start", s.start);
  if (s.end) {
    out += ", ";
    append_point(out, "end", *s.end);
  }
  if (s.magnitude) {
    out += ", mag=";
    out += to_token(*s.magnitude);
  }
  out += ')';
  return out;
}

std::string emit_symbol_code(const SymbolSet& set) {
  require_valid(set, std::nullopt);
  std::string out = "frame=" + std::to_string(set.frame_index) + " purpose=" +
                    std::string(to_token(set.purpose)) + "\n";
  for (const auto& s : set.symbols) {
    out += emit_symbol_line(s);
    out += '\n';
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool looks_like_symbol_line(std::string_view line) {
  const auto paren = line.find('(');
  if (paren == std::string_view::npos || line.back() != ')') return false;
  return kind_from_token(trim(line.substr(0, paren))).has_value();
}

}  // namespace

std::optional<std::string> extract_symbol_code(std::string_view text) {
  // Fenced block first.
  std::size_t search = 0;
  while (true) {
    const std::size_t open = text.find("```", search);
    if (open == std::string_view::npos) break;
    const std::size_t body = text.find('\n', open);
    if (body == std::string_view::npos) break;
    const std::size_t close = text.find("```", body);
    if (close == std::string_view::npos) break;
    const std::string_view block = text.substr(body + 1, close - body - 1);
    if (trim(block).starts_with("frame=")) {
      std::string out(trim(block));
      out += '\n';
      return out;
    }
    search = close + 3;
  }

  // Bare header followed by symbol lines.
  std::size_t pos = 0;
  std::optional<std::string> out;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (!out) {
      if (line.starts_with("frame=")) out = std::string(line) + "\n";
    } else if (!line.empty() && looks_like_symbol_line(line)) {
      *out += std::string(line) + "\n";
    } else {
      break;
    }
  }
  return out;
}

}  // namespace symguide::symbols
