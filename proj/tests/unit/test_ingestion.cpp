#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/fixtures.hpp"
#include "transit/ingestion.hpp"
#include "transit/synth/corpus.hpp"

using namespace transit;
using namespace transit::ingest;
using transit::testing::kOrigin;
using transit::testing::kT0;
using transit::testing::make_raw;

namespace {

std::vector<std::uint64_t> seqs(const std::vector<RawTuple>& ts) {
  std::vector<std::uint64_t> out;
  for (const auto& t : ts) out.push_back(t.seq);
  return out;
}

class FlakySource : public StreamSource {
 public:
  FlakySource(std::vector<RawTuple> tuples, std::vector<int> failures_before)
      : tuples_(std::move(tuples)), failures_(std::move(failures_before)) {}
  ReadResult read() override {
    if (i_ >= tuples_.size()) return ReadResult::end_of_stream();
    if (failures_[i_] > 0) {
      --failures_[i_];
      return ReadResult::failure("socket hiccup");
    }
    return ReadResult::of(tuples_[i_++]);
  }
  std::uint64_t cursor() const override { return i_; }

 private:
  std::vector<RawTuple> tuples_;
  std::vector<int> failures_;
  std::size_t i_ = 0;
};

class BrokenStore : public MemoryTupleStore {
 public:
  void append(const std::vector<RawTuple>&) override { throw StoreError("disk full"); }
};

}  // namespace

TEST_CASE("window_start floors to 5 s, also before the epoch") {
  CHECK(window_start(0) == 0);
  CHECK(window_start(4) == 0);
  CHECK(window_start(5) == 5);
  CHECK(window_start(-1) == -5);
  CHECK(window_start(kT0 + 7) == kT0 + 5);
}

TEST_CASE("windows follow event time, not arrival order") {
  // arrivals t+7, t, t+1
  std::vector<RawTuple> in = {make_raw("51", "a", kT0 + 7, kOrigin, 0), make_raw("51", "a", kT0, kOrigin, 1),
                              make_raw("51", "a", kT0 + 1, kOrigin, 2)};
  const auto windows = assign_windows(in);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].start == kT0);
  CHECK(windows[0].end == kT0 + 5);
  CHECK(seqs(windows[0].members) == std::vector<std::uint64_t>{1, 2});
  CHECK(windows[1].start == kT0 + 5);
  CHECK(windows[1].members.size() == 1);

  MemoryTupleStore store;
  VectorSource src(in);
  const auto summary = ingest_loop(src, store, {});
  CHECK(summary.tuples == 3);
  CHECK(summary.windows == 2);
}

TEST_CASE("window assignment is invariant under arrival permutation") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<EpochSeconds> dt(0, 600);
  for (int c = 0; c < 1000; ++c) {
    std::vector<RawTuple> in;
    for (std::uint64_t i = 0; i < 20; ++i) in.push_back(make_raw("51", "a", kT0 + dt(rng), kOrigin, i));
    const auto base = assign_windows(in);
    std::shuffle(in.begin(), in.end(), rng);
    const auto again = assign_windows(in);
    REQUIRE(base.size() == again.size());
    for (std::size_t w = 0; w < base.size(); ++w) {
      CHECK(base[w].start == again[w].start);
      CHECK(seqs(base[w].members) == seqs(again[w].members));
    }
  }
}

TEST_CASE("empty source ingests nothing") {
  MemoryTupleStore store;
  VectorSource src({});
  const auto s = ingest_loop(src, store);
  CHECK(s.tuples == 0);
  CHECK(s.windows == 0);
  CHECK(store.size() == 0);
}

TEST_CASE("a one hour synthetic trip at 5 s cadence fills 720 windows") {
  const synth::City city;
  const auto points = synth::constant_step_points(city, 0, 720, 20.0);
  const auto stream = synth::generate_synthetic(
      city, {{synth::trip_template(city, 0, "51-1"), points, kT0}}, synth::DefectProfile{});
  MemoryTupleStore store;
  VectorSource src(stream.tuples);
  const auto s = ingest_loop(src, store);
  CHECK(s.tuples == 720);
  CHECK(s.windows == 720);
}

TEST_CASE("query_range is half-open and sorted") {
  MemoryTupleStore store;
  store.append({make_raw("51", "a", kT0 + 10, kOrigin, 0), make_raw("51", "a", kT0, kOrigin, 1),
                make_raw("51", "a", kT0 + 5, kOrigin, 2), make_raw("51", "a", kT0 + 5, kOrigin, 3)});
  CHECK(store.query_range(kT0, kT0).empty());
  CHECK(seqs(store.query_range(kT0, kT0 + 10)) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(seqs(store.query_range(kT0, kT0 + 11)) == std::vector<std::uint64_t>{1, 2, 3, 0});
  CHECK_THROWS_AS(store.query_range(kT0 + 1, kT0), std::invalid_argument);
}

TEST_CASE("file store round-trips and survives reopening") {
  testing::TempDir dir("store");
  std::vector<RawTuple> in;
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto t = make_raw(i % 2 ? "51" : "52", "t" + std::to_string(i % 3), kT0 + static_cast<EpochSeconds>(i * 5 % 97),
                        kOrigin, i);
    t.extras.push_back({"odometer", std::to_string(i)});
    in.push_back(t);
  }
  {
    FileTupleStore store(dir.path());
    store.append(in);
    CHECK(store.size() == 50);
  }
  FileTupleStore store(dir.path());
  CHECK(store.size() == 50);
  CHECK(store.next_seq() == 50);
  const auto all = store.query_range(kT0, kT0 + 1000);
  REQUIRE(all.size() == 50);
  CHECK(std::is_sorted(all.begin(), all.end(), [](const RawTuple& a, const RawTuple& b) {
    return std::tie(*a.timestamp, a.seq) < std::tie(*b.timestamp, b.seq);
  }));
  for (const auto& t : all) CHECK(t.same_content(in[t.seq]));
  const auto trip = store.query_trip(*trip_key_of(in[1]));
  CHECK_FALSE(trip.empty());
  for (const auto& t : trip) CHECK(trip_key_of(t) == trip_key_of(in[1]));
  const auto scanned = store.scan_all();
  CHECK(seqs(scanned) == seqs(in));
}

TEST_CASE("ingest then query_range is the identity on the multiset") {
  testing::TempDir dir("ingest");
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<EpochSeconds> dt(0, 3600);
  std::vector<RawTuple> in;
  for (std::uint64_t i = 0; i < 300; ++i) in.push_back(make_raw("51", "a", kT0 + dt(rng), kOrigin));
  FileTupleStore store(dir.path());
  VectorSource src(in);
  ingest_loop(src, store);
  auto out = store.query_range(kT0, kT0 + 3601);
  REQUIRE(out.size() == in.size());
  std::vector<EpochSeconds> a, b;
  for (const auto& t : in) a.push_back(*t.timestamp);
  for (const auto& t : out) b.push_back(*t.timestamp);
  std::sort(a.begin(), a.end());
  CHECK(a == b);
}

TEST_CASE("real-time mode flags tuples that arrive after their window closed") {
  std::vector<RawTuple> in = {make_raw("51", "a", kT0, kOrigin), make_raw("51", "a", kT0 + 100, kOrigin),
                              make_raw("51", "a", kT0 + 2, kOrigin),   // window closed at watermark t+40
                              make_raw("51", "a", kT0 + 50, kOrigin)}; // still open
  MemoryTupleStore store;
  VectorSource src(in);
  IngestOptions opt;
  opt.mode = ServingRate::real_time;
  opt.allowed_lateness_s = 60;
  const auto s = ingest_loop(src, store, opt);
  CHECK(s.tuples == 4);
  CHECK(s.late_tuples == 1);
  const auto all = store.scan_all();
  CHECK(std::count_if(all.begin(), all.end(), [](const RawTuple& t) { return t.late; }) == 1);
}

TEST_CASE("replay mode never marks tuples late") {
  std::vector<RawTuple> in = {make_raw("51", "a", kT0 + 1000, kOrigin), make_raw("51", "a", kT0, kOrigin)};
  MemoryTupleStore store;
  VectorSource src(in);
  const auto s = ingest_loop(src, store);
  CHECK(s.late_tuples == 0);
  CHECK(s.windows == 2);
}

TEST_CASE("read failures are retried, and a run past the budget is a gap") {
  std::vector<RawTuple> in = {make_raw("51", "a", kT0, kOrigin), make_raw("51", "a", kT0 + 5, kOrigin),
                              make_raw("51", "a", kT0 + 10, kOrigin)};
  MemoryTupleStore store;
  FlakySource src(in, {0, 2, 5});
  IngestOptions opt;
  opt.retry.max_retries = 3;
  opt.retry.initial_backoff = std::chrono::milliseconds(0);
  const auto s = ingest_loop(src, store, opt);
  CHECK(s.tuples == 3);
  CHECK(s.read_errors == 7);
  CHECK(s.gaps == 1);
}

TEST_CASE("a store failure aborts with a partial summary") {
  BrokenStore store;
  VectorSource src({make_raw("51", "a", kT0, kOrigin)});
  const auto s = ingest_loop(src, store);
  CHECK(s.aborted);
  CHECK(s.tuples == 0);
  CHECK(s.error.find("disk full") != std::string::npos);
}

TEST_CASE("stop condition caps the tuple count") {
  std::vector<RawTuple> in;
  for (int i = 0; i < 10; ++i) in.push_back(make_raw("51", "a", kT0 + 5 * i, kOrigin));
  MemoryTupleStore store;
  VectorSource src(in);
  IngestOptions opt;
  opt.stop.max_tuples = 4;
  CHECK(ingest_loop(src, store, opt).tuples == 4);
}
