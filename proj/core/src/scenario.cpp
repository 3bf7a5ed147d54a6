#include "grading/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grading/rng.hpp"
#include "json_io.hpp"

namespace grading {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::init: return "init";
    case Family::continuous: return "continuous";
    case Family::edge: return "edge";
    case Family::random: return "random";
  }
  return "init";
}

Family parse_family(std::string_view name) {
  if (name == "init") return Family::init;
  if (name == "continuous") return Family::continuous;
  if (name == "edge") return Family::edge;
  if (name == "random") return Family::random;
  throw Error(ErrorCode::invalid_spec, "unknown scenario family '" + std::string(name) + "'");
}

ScenarioSpec ScenarioSpec::defaults(Family family) {
  ScenarioSpec s;
  s.family = family;
  switch (family) {
    case Family::init:
      break;
    case Family::continuous:
      s.length = 20.0;
      s.pile_rows = {1, 2};
      s.edge_distance = 3.5;
      s.first_row_distance = 4.5;
      s.dump_every = 8;
      s.dump_rows = 3;
      break;
    case Family::edge:
      s.width = 24.0;
      s.length = 20.0;
      s.start = {12.0, 2.0, std::numbers::pi / 2};
      s.pile_rows = {1, 1};
      s.edge_distance = 15.5;
      s.first_row_distance = 15.0;
      break;
    case Family::random:
      s.fill_depth = 0.0;
      break;
  }
  return s;
}

void ScenarioSpec::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::invalid_spec, what); };
  if (!(width > 0.0) || !(length > 0.0)) fail("area dimensions must be positive");
  if (pile_rows.lo > pile_rows.hi || piles_per_row.lo > piles_per_row.hi) fail("count range lo > hi");
  if (!(peak.lo > 0.0) || peak.lo > peak.hi) fail("peak range must be positive with lo <= hi");
  if (!(sigma.lo > 0.0) || sigma.lo > sigma.hi) fail("sigma range must be positive with lo <= hi");
  if (!(spacing > 0.0)) fail("lattice spacing must be positive");
  if (!(fill_depth >= 0.0)) fail("fill depth must be non-negative");
  if (!(start.x >= 0.0 && start.x <= width && start.y >= 0.0 && start.y <= length)) {
    fail("dozer start lies outside the area");
  }
  for (const auto& e : extra_dumps) {
    if (e.step == 0) fail("dump events need step >= 1");
    for (const auto& p : e.piles) {
      if (!(p.sigma_x > 0.0 && p.sigma_y > 0.0 && p.peak_height > 0.0)) fail("invalid dumped pile");
    }
  }
}

double distance_ahead(const ScenarioSpec& spec, double x, double y) noexcept {
  return (x - spec.start.x) * std::cos(spec.start.heading) +
         (y - spec.start.y) * std::sin(spec.start.heading);
}

namespace {

GaussianPile draw_pile(SplitMix64& rng, const ScenarioSpec& spec, double x, double y) {
  GaussianPile p;
  p.center_x = x;
  p.center_y = y;
  p.peak_height = rng.uniform(spec.peak.lo, spec.peak.hi);
  p.sigma_x = rng.uniform(spec.sigma.lo, spec.sigma.hi);
  p.sigma_y = rng.uniform(spec.sigma.lo, spec.sigma.hi);
  p.rotation = rng.uniform(0.0, std::numbers::pi);
  return p;
}

// One lattice row `ahead` meters in front of the start, centered on its line.
std::vector<GaussianPile> lattice_row(SplitMix64& rng, const ScenarioSpec& spec, double ahead,
                                      std::size_t count) {
  const double fx = std::cos(spec.start.heading);
  const double fy = std::sin(spec.start.heading);
  std::vector<GaussianPile> row;
  for (std::size_t j = 0; j < count; ++j) {
    const double lateral = (static_cast<double>(j) - 0.5 * static_cast<double>(count - 1)) * spec.spacing;
    const double x = spec.start.x + ahead * fx - lateral * fy;
    const double y = spec.start.y + ahead * fy + lateral * fx;
    row.push_back(draw_pile(rng, spec, x, y));
  }
  return row;
}

}  // namespace

Scenario generate(const ScenarioSpec& spec, std::uint64_t seed, const Config& config) {
  spec.validate();
  config.validate();
  const double cell = config.cell_size;
  const auto rows = static_cast<std::size_t>(std::llround(spec.length / cell));
  const auto cols = static_cast<std::size_t>(std::llround(spec.width / cell));
  if (rows == 0 || cols == 0) throw Error(ErrorCode::invalid_spec, "area smaller than one cell");

  SplitMix64 rng(seed);
  Scenario out{HeightMap(rows, cols, cell, 0.0), HeightMap(rows, cols, cell, 0.0),
               DozerState{spec.start, 0.0, config.dozer}, {}, spec.start.heading, spec.spacing};

  // ground: below target wherever the area is not yet graded
  HeightMap& ground = out.initial;
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * cell;
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = (static_cast<double>(c) + 0.5) * cell;
      bool graded = false;
      if (spec.family == Family::continuous || spec.family == Family::edge) {
        graded = distance_ahead(spec, x, y) < spec.edge_distance;
      }
      ground.at(r, c) = graded ? 0.0 : -spec.fill_depth;
    }
  }

  const auto n_rows = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(spec.pile_rows.lo), static_cast<std::int64_t>(spec.pile_rows.hi)));
  const auto per_row = static_cast<std::size_t>(rng.uniform_int(
      static_cast<std::int64_t>(spec.piles_per_row.lo), static_cast<std::int64_t>(spec.piles_per_row.hi)));

  std::vector<GaussianPile> piles;
  if (spec.family == Family::random) {
    const double margin = std::min({1.0, 0.25 * spec.width, 0.25 * spec.length});
    const std::size_t total = n_rows * per_row;
    while (piles.size() < total) {
      const double x = rng.uniform(margin, spec.width - margin);
      const double y = rng.uniform(margin, spec.length - margin);
      if (std::hypot(x - spec.start.x, y - spec.start.y) < 2.0 * spec.spacing) continue;
      piles.push_back(draw_pile(rng, spec, x, y));
    }
  } else {
    for (std::size_t k = 0; k < n_rows; ++k) {
      const double ahead = spec.first_row_distance + static_cast<double>(k) * spec.spacing;
      auto row = lattice_row(rng, spec, ahead, per_row);
      piles.insert(piles.end(), row.begin(), row.end());
    }
  }
  for (const auto& p : piles) ground = add_pile(std::move(ground), p);

  if (spec.family == Family::continuous && spec.dump_every > 0) {
    for (std::size_t d = 0; d < spec.dump_rows; ++d) {
      const double ahead =
          spec.first_row_distance + static_cast<double>(n_rows + d) * spec.spacing;
      out.dumps.push_back({(d + 1) * spec.dump_every, lattice_row(rng, spec, ahead, per_row)});
    }
  }
  out.dumps.insert(out.dumps.end(), spec.extra_dumps.begin(), spec.extra_dumps.end());
  std::stable_sort(out.dumps.begin(), out.dumps.end(),
                   [](const DumpEvent& a, const DumpEvent& b) { return a.step < b.step; });
  return out;
}

json to_json(const GaussianPile& p) {
  return json{{"x", p.center_x},      {"y", p.center_y},          {"sigma_x", p.sigma_x},
              {"sigma_y", p.sigma_y}, {"peak", p.peak_height}, {"rotation", p.rotation}};
}

GaussianPile pile_from_json(const json& j) {
  GaussianPile p;
  p.center_x = j.at("x").get<double>();
  p.center_y = j.at("y").get<double>();
  p.sigma_x = j.at("sigma_x").get<double>();
  p.sigma_y = j.at("sigma_y").get<double>();
  p.peak_height = j.at("peak").get<double>();
  p.rotation = j.value("rotation", 0.0);
  return p;
}

json to_json(const ScenarioSpec& s) {
  json dumps = json::array();
  for (const auto& e : s.extra_dumps) {
    json piles = json::array();
    for (const auto& p : e.piles) piles.push_back(to_json(p));
    dumps.push_back({{"step", e.step}, {"piles", piles}});
  }
  return json{{"family", std::string(to_string(s.family))},
              {"width", s.width},
              {"length", s.length},
              {"pile_rows", {s.pile_rows.lo, s.pile_rows.hi}},
              {"piles_per_row", {s.piles_per_row.lo, s.piles_per_row.hi}},
              {"peak", {s.peak.lo, s.peak.hi}},
              {"sigma", {s.sigma.lo, s.sigma.hi}},
              {"spacing", s.spacing},
              {"first_row_distance", s.first_row_distance},
              {"edge_distance", s.edge_distance},
              {"fill_depth", s.fill_depth},
              {"dump_every", s.dump_every},
              {"dump_rows", s.dump_rows},
              {"start", {s.start.x, s.start.y, s.start.heading}},
              {"extra_dumps", dumps}};
}

ScenarioSpec spec_from_json(const json& j) {
  try {
    // unspecified fields fall back to the family defaults
    ScenarioSpec s = ScenarioSpec::defaults(parse_family(j.at("family").get<std::string>()));
    auto range = [&](const char* key, Range& r) {
      if (j.contains(key)) r = {j[key].at(0).get<double>(), j[key].at(1).get<double>()};
    };
    auto counts = [&](const char* key, CountRange& r) {
      if (j.contains(key)) r = {j[key].at(0).get<std::size_t>(), j[key].at(1).get<std::size_t>()};
    };
    s.width = j.value("width", s.width);
    s.length = j.value("length", s.length);
    counts("pile_rows", s.pile_rows);
    counts("piles_per_row", s.piles_per_row);
    range("peak", s.peak);
    range("sigma", s.sigma);
    s.spacing = j.value("spacing", s.spacing);
    s.first_row_distance = j.value("first_row_distance", s.first_row_distance);
    s.edge_distance = j.value("edge_distance", s.edge_distance);
    s.fill_depth = j.value("fill_depth", s.fill_depth);
    s.dump_every = j.value("dump_every", s.dump_every);
    s.dump_rows = j.value("dump_rows", s.dump_rows);
    if (j.contains("start")) {
      const auto& st = j["start"];
      s.start = {st.at(0).get<double>(), st.at(1).get<double>(), st.at(2).get<double>()};
    }
    if (j.contains("extra_dumps")) {
      for (const auto& e : j["extra_dumps"]) {
        DumpEvent ev;
        ev.step = e.at("step").get<std::size_t>();
        for (const auto& p : e.at("piles")) ev.piles.push_back(pile_from_json(p));
        s.extra_dumps.push_back(std::move(ev));
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_spec, std::string("malformed scenario spec: ") + e.what());
  }
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

std::string scenario_to_text(const ScenarioSpec& spec) { return to_json(spec).dump(2) + "\n"; }

ScenarioSpec scenario_from_text(std::string_view text) { return spec_from_json(parse_json(text)); }

}  // namespace grading
