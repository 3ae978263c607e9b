#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace osnr::matpower {

enum class BusType { pq = 1, pv = 2, ref = 3 };

struct Bus {
  int id = 0;
  BusType type = BusType::pq;
  double pd_mw = 0.0;  // active demand, MW
};

struct Branch {
  int from = 0;
  int to = 0;
  double x_pu = 0.0;       // series reactance, p.u.
  double rate_a_mva = 0.0; // thermal rating; 0 means unlimited
};

struct Gen {
  int bus = 0;
  double p_min_mw = 0.0;
  double p_max_mw = 0.0;
};

struct GenCost {
  double a = 0.0;  // $/MW^2
  double b = 0.0;  // $/MW
};

/// The columns of a MATPOWER case this project consumes. Everything else in
/// the file is skipped by column position.
struct PowerCase {
  double base_mva = 0.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Gen> gens;
  std::vector<GenCost> gencosts;  // aligned with gens
};

/// Parse a MATPOWER-style case definition. Requires the mpc.baseMVA,
/// mpc.bus, mpc.branch, mpc.gen and mpc.gencost sections; '%' comments and
/// arbitrary whitespace are tolerated; rows end with ';'.
PowerCase parse_case(std::string_view text);

/// Assert the structural invariants: positive base, known endpoints, exactly
/// one reference bus, nonzero reactances, aligned cost rows, connectivity.
void validate_case(const PowerCase& c);

/// Minimal writer for fixtures; emits only the retained columns (plus
/// zero-padding to the standard widths) so parse(write(parse(t))) is
/// idempotent on them.
std::string write_case(const PowerCase& c);

PowerCase load_case_file(const std::string& path);

}  // namespace osnr::matpower
