#include "msmrf/field.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace msmrf {

Field::Field(std::shared_ptr<const SiteLayout> layout)
    : layout_(std::move(layout)),
      ground_(static_cast<std::size_t>(layout_->size()), 1),
      coords_(layout_->ground) {}

void Field::set_ground(Index i) {
  ground_[static_cast<std::size_t>(i)] = 1;
  coords_.segment(layout_->offsets[static_cast<std::size_t>(i)], dim(i)) = ground_coords(i);
}

void Field::set_real(Index i, const Eigen::Ref<const RealVector>& x) {
  if (x.size() != dim(i)) throw std::invalid_argument("site " + std::to_string(i) + ": dimension mismatch");
  if (!all_finite(x)) throw std::invalid_argument("site " + std::to_string(i) + ": non-finite value");
  coords_.segment(layout_->offsets[static_cast<std::size_t>(i)], dim(i)) = x;
  ground_[static_cast<std::size_t>(i)] = bit_equal(x, ground_coords(i)) ? 1 : 0;
}

void Field::set(Index i, const MixedValue& v) {
  if (v.is_atom()) set_ground(i);
  else if (v.is_real()) set_real(i, v.as_real());
  else throw std::invalid_argument("labels are not valid states of a real mixed-state field");
}

MixedValue Field::value(Index i) const {
  if (is_ground(i)) return MixedValue::atom();
  return MixedValue::real(RealVector(coords(i)));
}

Index Field::ground_count() const {
  Index n = 0;
  for (auto g : ground_) n += g;
  return n;
}

bool operator==(const Field& a, const Field& b) {
  if (a.layout_->dims != b.layout_->dims || a.ground_ != b.ground_) return false;
  return bit_equal(a.coords_, b.coords_) && bit_equal(a.layout_->ground, b.layout_->ground);
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t' || line[k] == '\r')) ++k;
    std::size_t start = k;
    while (k < line.size() && line[k] != ' ' && line[k] != '\t' && line[k] != '\r') ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

Index parse_index(std::string_view tok, std::size_t line, const char* what) {
  Index v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 1) {
    throw FieldFormatError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

FieldHeader parse_header(std::string_view text, std::size_t line) {
  const auto toks = split_ws(text);
  if (toks.size() != 5 || toks[0] != "msmrf-field") throw FieldFormatError(line, "expected header 'msmrf-field 1 <H> <W> <n>'");
  if (toks[1] != "1") throw FieldFormatError(line, "unsupported field format version '" + std::string(toks[1]) + "'");
  return FieldHeader{parse_index(toks[2], line, "height"), parse_index(toks[3], line, "width"),
                     parse_index(toks[4], line, "dimension")};
}

}  // namespace

std::string format_field(const Field& field, Index height, Index width) {
  if (height * width != field.size()) throw std::invalid_argument("field shape does not match its site count");
  const Index dim = field.size() ? field.dim(0) : 1;
  for (Index i = 0; i < field.size(); ++i) {
    if (field.dim(i) != dim) throw std::invalid_argument("field files require a common site dimension");
  }
  std::string out = "msmrf-field 1 " + std::to_string(height) + " " + std::to_string(width) + " " +
                    std::to_string(dim) + "\n";
  for (Index r = 0; r < height; ++r) {
    for (Index c = 0; c < width; ++c) {
      const Index i = r * width + c;
      if (c) out += ' ';
      if (field.is_ground(i)) {
        out += 'G';
        continue;
      }
      const auto x = field.coords(i);
      for (Index k = 0; k < x.size(); ++k) {
        if (k) out += ',';
        append_double(out, x[k]);
      }
    }
    out += '\n';
  }
  return out;
}

void write_field(std::ostream& os, const Field& field, Index height, Index width) {
  os << format_field(field, height, width);
}

FieldHeader read_field_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FieldFormatError(1, "empty field file");
  return parse_header(line, 1);
}

Field read_field(std::istream& is, const SiteGraph& graph) {
  const auto header = read_field_header(is);
  if (header.height * header.width != graph.size()) {
    throw FieldFormatError(1, "field shape " + std::to_string(header.height) + "x" + std::to_string(header.width) +
                                  " does not match " + std::to_string(graph.size()) + " sites");
  }
  Field field(graph);
  std::string line;
  RealVector x;
  for (Index r = 0; r < header.height; ++r) {
    const std::size_t lineno = static_cast<std::size_t>(r) + 2;
    if (!std::getline(is, line)) throw FieldFormatError(lineno, "unexpected end of file, expected row " + std::to_string(r + 1));
    const auto toks = split_ws(line);
    if (static_cast<Index>(toks.size()) != header.width) {
      throw FieldFormatError(lineno, "expected " + std::to_string(header.width) + " tokens, found " +
                                         std::to_string(toks.size()));
    }
    for (Index c = 0; c < header.width; ++c) {
      const Index i = r * header.width + c;
      const auto tok = toks[static_cast<std::size_t>(c)];
      if (tok == "G") {
        field.set_ground(i);
        continue;
      }
      if (graph.dim(i) != header.dim) throw FieldFormatError(lineno, "site dimension differs from the header");
      x.resize(header.dim);
      const char* p = tok.data();
      const char* end = tok.data() + tok.size();
      for (Index k = 0; k < header.dim; ++k) {
        auto res = std::from_chars(p, end, x[k]);
        if (res.ec != std::errc()) throw FieldFormatError(lineno, "bad number in token '" + std::string(tok) + "'");
        p = res.ptr;
        if (k + 1 < header.dim) {
          if (p == end || *p != ',') throw FieldFormatError(lineno, "token '" + std::string(tok) + "' has too few components");
          ++p;
        }
      }
      if (p != end) throw FieldFormatError(lineno, "trailing characters in token '" + std::string(tok) + "'");
      if (!all_finite(x)) throw FieldFormatError(lineno, "non-finite value in token '" + std::string(tok) + "'");
      field.set_real(i, x);
    }
  }
  while (std::getline(is, line)) {
    if (!split_ws(line).empty()) throw FieldFormatError(static_cast<std::size_t>(header.height) + 2, "unexpected trailing content");
  }
  return field;
}

Field parse_field(const std::string& text, const SiteGraph& graph) {
  std::istringstream is(text);
  return read_field(is, graph);
}

}  // namespace msmrf
