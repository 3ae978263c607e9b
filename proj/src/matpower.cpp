#include "osnr/matpower.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "osnr/errors.hpp"

namespace osnr::matpower {

namespace {

int line_of(std::string_view text, std::size_t pos) {
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Strip '%' comments, keeping newlines so line numbers survive.
std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') {
      in_comment = false;
      out.push_back(c);
    } else if (in_comment) {
      out.push_back(' ');
    } else if (c == '%') {
      in_comment = true;
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  }
  bool at(char c) { return pos < text.size() && text[pos] == c; }
  [[noreturn]] void fail(const std::string& what) {
    raise(ErrorKind::parse,
          what + " at line " + std::to_string(line_of(text, pos)));
  }
  double number() {
    skip_ws();
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("malformed numeric token");
    pos += static_cast<std::size_t>(ptr - begin);
    return value;
  }
};

// Locate "mpc.<name>" followed by '='; returns cursor past the '='.
Cursor find_section(std::string_view text, const std::string& name) {
  const std::string marker = "mpc." + name;
  std::size_t from = 0;
  while (true) {
    const std::size_t hit = text.find(marker, from);
    if (hit == std::string_view::npos) {
      raise(ErrorKind::parse, "missing section mpc." + name);
    }
    Cursor c{text, hit + marker.size()};
    c.skip_ws();
    if (c.at('=')) {
      ++c.pos;
      return c;
    }
    from = hit + 1;
  }
}

std::vector<std::vector<double>> parse_matrix(std::string_view text,
                                              const std::string& name) {
  Cursor c = find_section(text, name);
  c.skip_ws();
  if (!c.at('[')) c.fail("expected '[' opening mpc." + name);
  ++c.pos;
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  while (true) {
    c.skip_ws();
    if (c.pos >= c.text.size()) c.fail("unterminated matrix mpc." + name);
    if (c.at(']')) {
      if (!row.empty()) rows.push_back(std::move(row));
      return rows;
    }
    if (c.at(';')) {
      ++c.pos;
      if (!row.empty()) rows.push_back(std::move(row));
      row.clear();
      continue;
    }
    if (c.at(',')) {  // MATLAB allows comma separators within a row
      ++c.pos;
      continue;
    }
    row.push_back(c.number());
  }
}

double parse_scalar(std::string_view text, const std::string& name) {
  Cursor c = find_section(text, name);
  return c.number();
}

void need_columns(const std::vector<double>& row, std::size_t n,
                  const std::string& section, std::size_t index) {
  if (row.size() < n) {
    raise(ErrorKind::parse, "mpc." + section + " row " + std::to_string(index + 1) +
                                " has " + std::to_string(row.size()) +
                                " columns, expected at least " + std::to_string(n));
  }
}

}  // namespace

PowerCase parse_case(std::string_view raw) {
  const std::string text = strip_comments(raw);

  PowerCase pc;
  pc.base_mva = parse_scalar(text, "baseMVA");

  const auto bus_rows = parse_matrix(text, "bus");
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < bus_rows.size(); ++i) {
    need_columns(bus_rows[i], 3, "bus", i);
    Bus b;
    b.id = static_cast<int>(bus_rows[i][0]);
    const int type = static_cast<int>(bus_rows[i][1]);
    if (type < 1 || type > 3) {
      raise(ErrorKind::validation,
            "bus " + std::to_string(b.id) + ": unsupported bus type " +
                std::to_string(type));
    }
    b.type = static_cast<BusType>(type);
    b.pd_mw = bus_rows[i][2];
    if (!seen_ids.insert(b.id).second) {
      raise(ErrorKind::validation, "duplicate bus id " + std::to_string(b.id));
    }
    pc.buses.push_back(b);
  }

  const auto branch_rows = parse_matrix(text, "branch");
  for (std::size_t i = 0; i < branch_rows.size(); ++i) {
    need_columns(branch_rows[i], 6, "branch", i);
    Branch br;
    br.from = static_cast<int>(branch_rows[i][0]);
    br.to = static_cast<int>(branch_rows[i][1]);
    br.x_pu = branch_rows[i][3];
    br.rate_a_mva = branch_rows[i][5];
    pc.branches.push_back(br);
  }

  const auto gen_rows = parse_matrix(text, "gen");
  for (std::size_t i = 0; i < gen_rows.size(); ++i) {
    need_columns(gen_rows[i], 10, "gen", i);
    Gen g;
    g.bus = static_cast<int>(gen_rows[i][0]);
    g.p_max_mw = gen_rows[i][8];
    g.p_min_mw = gen_rows[i][9];
    pc.gens.push_back(g);
  }

  const auto cost_rows = parse_matrix(text, "gencost");
  for (std::size_t i = 0; i < cost_rows.size(); ++i) {
    need_columns(cost_rows[i], 4, "gencost", i);
    const auto& row = cost_rows[i];
    const int model = static_cast<int>(row[0]);
    if (model != 2) {
      raise(ErrorKind::unsupported_cost,
            "gencost row " + std::to_string(i + 1) +
                ": only polynomial model 2 is supported, got model " +
                std::to_string(model));
    }
    const int ncoef = static_cast<int>(row[3]);
    if (ncoef > 3) {
      raise(ErrorKind::unsupported_cost,
            "gencost row " + std::to_string(i + 1) + ": polynomial degree " +
                std::to_string(ncoef - 1) + " exceeds 2");
    }
    need_columns(row, 4 + static_cast<std::size_t>(std::max(ncoef, 0)), "gencost", i);
    GenCost gc;
    if (ncoef == 3) {
      gc.a = row[4];
      gc.b = row[5];
    } else if (ncoef == 2) {
      gc.b = row[4];
    }
    pc.gencosts.push_back(gc);
  }

  return pc;
}

void validate_case(const PowerCase& c) {
  if (!(c.base_mva > 0.0)) {
    raise(ErrorKind::validation,
          "baseMVA must be positive, got " + std::to_string(c.base_mva));
  }
  if (c.buses.empty()) raise(ErrorKind::validation, "case has no buses");
  if (c.gencosts.size() != c.gens.size()) {
    raise(ErrorKind::validation,
          "gencost rows (" + std::to_string(c.gencosts.size()) +
              ") do not match generators (" + std::to_string(c.gens.size()) + ")");
  }

  std::unordered_map<int, std::size_t> bus_index;
  for (std::size_t i = 0; i < c.buses.size(); ++i) bus_index[c.buses[i].id] = i;

  int ref_count = 0;
  for (const Bus& b : c.buses) {
    if (b.type == BusType::ref) ++ref_count;
  }
  if (ref_count != 1) {
    raise(ErrorKind::validation, "reference bus: expected exactly one, found " +
                                     std::to_string(ref_count));
  }

  for (const Branch& br : c.branches) {
    if (!bus_index.count(br.from) || !bus_index.count(br.to)) {
      raise(ErrorKind::validation,
            "dangling branch " + std::to_string(br.from) + "-" +
                std::to_string(br.to) + " references an unknown bus");
    }
    if (br.x_pu == 0.0) {
      raise(ErrorKind::validation, "zero-reactance branch " +
                                       std::to_string(br.from) + "-" +
                                       std::to_string(br.to));
    }
  }
  for (const Gen& g : c.gens) {
    if (!bus_index.count(g.bus)) {
      raise(ErrorKind::validation,
            "generator at unknown bus " + std::to_string(g.bus));
    }
  }

  // Connectivity over branches via union-find.
  std::vector<std::size_t> parent(c.buses.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const Branch& br : c.branches) {
    parent[find(bus_index[br.from])] = find(bus_index[br.to]);
  }
  const std::size_t root = find(0);
  for (std::size_t i = 1; i < c.buses.size(); ++i) {
    if (find(i) != root) {
      raise(ErrorKind::degenerate_constraints,
            "network is disconnected (bus " + std::to_string(c.buses[i].id) +
                " unreachable from bus " + std::to_string(c.buses[0].id) + ")");
    }
  }
}

std::string write_case(const PowerCase& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "function mpc = case_generated\n";
  os << "mpc.baseMVA = " << num(c.base_mva) << ";\n\n";
  os << "mpc.bus = [\n";
  for (const Bus& b : c.buses) {
    os << "\t" << b.id << "\t" << static_cast<int>(b.type) << "\t" << num(b.pd_mw)
       << "\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;\n";
  }
  os << "];\n\nmpc.gen = [\n";
  for (const Gen& g : c.gens) {
    os << "\t" << g.bus << "\t0\t0\t0\t0\t1\t" << num(c.base_mva) << "\t1\t"
       << num(g.p_max_mw) << "\t" << num(g.p_min_mw) << ";\n";
  }
  os << "];\n\nmpc.branch = [\n";
  for (const Branch& br : c.branches) {
    os << "\t" << br.from << "\t" << br.to << "\t0\t" << num(br.x_pu) << "\t0\t"
       << num(br.rate_a_mva) << "\t0\t0\t0\t0\t1\t-360\t360;\n";
  }
  os << "];\n\nmpc.gencost = [\n";
  for (const GenCost& gc : c.gencosts) {
    os << "\t2\t0\t0\t3\t" << num(gc.a) << "\t" << num(gc.b) << "\t0;\n";
  }
  os << "];\n";
  return os.str();
}

PowerCase load_case_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(ErrorKind::invalid_argument, "cannot open case file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

}  // namespace osnr::matpower
