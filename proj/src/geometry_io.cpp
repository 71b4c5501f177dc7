#include "iontrap/geometry_io.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "iontrap/errors.hpp"
#include "iontrap/units.hpp"

namespace iontrap {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw input_error("line " + std::to_string(line) + ": " + message);
}

struct Section {
  std::string name;
  int line = 0;  // line of the [section] header
  std::map<std::string, std::pair<std::string, int>> entries;  // key -> (value, line)
};

std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header '" + line + "'");
      sections.push_back({trim(line.substr(1, line.size() - 2)), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
    if (sections.empty()) fail(line_no, "key/value pair before any [section] header");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    auto [it, inserted] = sections.back().entries.emplace(key, std::make_pair(value, line_no));
    if (!inserted) fail(line_no, "duplicate key '" + key + "' in [" + sections.back().name + "]");
  }
  return sections;
}

class SectionReader {
 public:
  explicit SectionReader(const Section& s) : section_(s) {}

  std::string take_string(const std::string& key) {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end())
      fail(section_.line, "[" + section_.name + "] is missing required key '" + key + "'");
    consumed_.insert(key);
    line_ = it->second.second;
    return it->second.first;
  }

  double take_length(const std::string& key) {
    const std::string text = take_string(key);
    try {
      return parse_length(text);
    } catch (const input_error& err) {
      fail(line_, std::string(err.what()));
    }
  }

  // "x, y" pair of lengths.
  Vec2 take_point(const std::string& key) {
    const std::string text = take_string(key);
    const auto comma = text.find(',');
    if (comma == std::string::npos)
      fail(line_, "'" + key + "' expects 'x, y', got '" + text + "'");
    try {
      return Vec2(parse_length(trim(text.substr(0, comma))),
                  parse_length(trim(text.substr(comma + 1))));
    } catch (const input_error& err) {
      fail(line_, std::string(err.what()));
    }
  }

  void reject_unknown_keys() const {
    for (const auto& [key, value] : section_.entries) {
      if (!consumed_.count(key))
        fail(value.second, "unknown key '" + key + "' in [" + section_.name + "]");
    }
  }

  int last_line() const { return line_; }

 private:
  const Section& section_;
  std::set<std::string> consumed_;
  int line_ = 0;
};

Role parse_role(const std::string& text, int line) {
  if (text == "rf") return Role::rf();
  if (text == "ground") return Role::ground();
  if (text.rfind("control", 0) == 0) {
    const std::string rest = trim(text.substr(7));
    if (!rest.empty() && rest.find_first_not_of("0123456789") == std::string::npos)
      return Role::control(std::stoi(rest));
    fail(line, "control role expects an index, e.g. 'control 0', got '" + text + "'");
  }
  fail(line, "unknown role '" + text + "' (expected rf, ground, or control <index>)");
}

Electrode parse_electrode(const Section& s) {
  SectionReader reader(s);
  const std::string shape = reader.take_string("shape");
  const std::string role_text = reader.take_string("role");
  const Role role = parse_role(role_text, reader.last_line());

  Electrode e;
  e.role = role;
  if (shape == "disc") {
    Disc d;
    d.center = reader.take_point("center");
    d.radius = reader.take_length("radius");
    e.shape = d;
  } else if (shape == "rectangle") {
    Rectangle r;
    r.center = reader.take_point("center");
    r.width = reader.take_length("width");
    r.height = reader.take_length("height");
    e.shape = r;
  } else if (shape == "half_slab") {
    HalfSlab h;
    h.inner_edge_x = reader.take_length("inner_edge_x");
    h.y_center = reader.take_length("y_center");
    h.thickness = reader.take_length("thickness");
    const std::string dir = reader.take_string("direction");
    if (dir == "left") {
      h.direction = SlabDirection::kLeft;
    } else if (dir == "right") {
      h.direction = SlabDirection::kRight;
    } else {
      fail(reader.last_line(), "direction must be 'left' or 'right', got '" + dir + "'");
    }
    h.extent = reader.take_length("extent");
    e.shape = h;
  } else {
    fail(s.line, "unknown shape '" + shape + "' (expected disc, rectangle, or half_slab)");
  }
  reader.reject_unknown_keys();
  return e;
}

void emit_length(std::ostringstream& out, const char* key, double meters) {
  out << key << " = " << format_shortest(meters) << "m\n";
}

}  // namespace

CrossSectionGeometry parse_spec_file(const std::string& text) {
  CrossSectionGeometry g;
  bool have_trap = false;
  for (const Section& s : split_sections(text)) {
    if (s.name == "trap") {
      if (have_trap) fail(s.line, "duplicate [trap] section");
      have_trap = true;
      SectionReader reader(s);
      g.d = reader.take_length("d");
      g.label = reader.take_string("label");
      reader.reject_unknown_keys();
    } else if (s.name == "electrode") {
      g.electrodes.push_back(parse_electrode(s));
    } else {
      fail(s.line, "unknown section [" + s.name + "] (expected [trap] or [electrode])");
    }
  }
  if (!have_trap) throw input_error("geometry document has no [trap] section");
  validate_geometry(g);
  return g;
}

std::string serialize_spec_file(const CrossSectionGeometry& g) {
  std::ostringstream out;
  out << "[trap]\n";
  emit_length(out, "d", g.d);
  out << "label = " << g.label << "\n";
  for (const Electrode& e : g.electrodes) {
    out << "\n[electrode]\n";
    if (const Disc* d = std::get_if<Disc>(&e.shape)) {
      out << "shape = disc\n";
      out << "role = " << role_to_string(e.role) << "\n";
      out << "center = " << format_shortest(d->center.x()) << "m, "
          << format_shortest(d->center.y()) << "m\n";
      emit_length(out, "radius", d->radius);
    } else if (const Rectangle* r = std::get_if<Rectangle>(&e.shape)) {
      out << "shape = rectangle\n";
      out << "role = " << role_to_string(e.role) << "\n";
      out << "center = " << format_shortest(r->center.x()) << "m, "
          << format_shortest(r->center.y()) << "m\n";
      emit_length(out, "width", r->width);
      emit_length(out, "height", r->height);
    } else {
      const HalfSlab& h = std::get<HalfSlab>(e.shape);
      out << "shape = half_slab\n";
      out << "role = " << role_to_string(e.role) << "\n";
      emit_length(out, "inner_edge_x", h.inner_edge_x);
      emit_length(out, "y_center", h.y_center);
      emit_length(out, "thickness", h.thickness);
      out << "direction = " << (h.direction == SlabDirection::kLeft ? "left" : "right") << "\n";
      emit_length(out, "extent", h.extent);
    }
  }
  return out.str();
}

}  // namespace iontrap
