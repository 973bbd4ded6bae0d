#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "transit/core_model.hpp"
#include "transit/synth/city.hpp"

namespace transit::synth {

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The bus leaves its route at arc position `leave_s`, drives `depth_m` down a
// side street, along a parallel street, and rejoins at `rejoin_s`.
struct Detour {
  double leave_s = 800.0;
  double rejoin_s = 1600.0;
  double depth_m = -400.0;  // northing offset of the parallel street
};

struct TripPlan {
  std::size_t route = 0;
  // One entry per route station, in route order: dwell tuples at the station
  // (0 = drive through). Terminals need at least one.
  std::vector<int> dwell;
  // One entry per route light: suspension tuples while held (0 = green).
  std::vector<int> hold;
  // Free running tuples between events. Exact total when set; otherwise each
  // gap gets round(length / step_m) - 1.
  std::optional<std::size_t> running_total;
  double step_m = 24.0;
  std::optional<Detour> detour;
};

// Intended labels of one planned position, fixed by construction.
struct PlannedPoint {
  Enu xy;
  MotionLabel motion = MotionLabel::stop;
  ActivityClass activity = ActivityClass::suspension_of_movement;
  std::string street;                  // leg name, or the wrong-street sentinel
  std::optional<std::size_t> station;  // city station index for stopover/passing
  bool off_route = false;
};

// Lays out positions at a 5 s cadence. Every position keeps at least 1 m from
// each 15 m and 30 m decision boundary and more than a cell diagonal from any
// street-name boundary of the grid; PlanError if that is impossible.
std::vector<PlannedPoint> plan_trip(const City& city, const TripPlan& plan);

// Descriptor values for a synthetic trip.
RawTuple trip_template(const City& city, std::size_t route, const std::string& trip_id);

std::vector<RawTuple> to_tuples(const City& city, const std::vector<PlannedPoint>& points, const RawTuple& templ,
                                EpochSeconds start, std::uint64_t first_seq = 0);

// A plan with every station served for `dwell` tuples and every light red for `hold`.
TripPlan uniform_plan(const City& city, std::size_t route, int dwell, int hold);
// Random dwell (0..8), random holds (0 or 5..30), terminals 3..12.
TripPlan random_plan(const City& city, std::size_t route, std::mt19937_64& rng);

// The 518-tuple trip on route 0: 230 moves / 288 stops, and 200 running,
// 30 passing, 62 stopover, 226 suspension.
TripPlan baseline_fixture_plan(const City& city);
// Route 0 with a detour around two blocks of its outbound street.
TripPlan detour_fixture_plan(const City& city);

}  // namespace transit::synth
