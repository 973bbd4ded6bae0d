#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transit/core_model.hpp"
#include "transit/tuple_io.hpp"

namespace transit::ingest {

inline constexpr EpochSeconds kWindowWidthS = 5;

// Start of the 5 s event-time window containing `t` (floor, also for negatives).
EpochSeconds window_start(EpochSeconds t);

struct EventWindow {
  EpochSeconds start = 0;  // inclusive
  EpochSeconds end = 0;    // exclusive
  std::vector<RawTuple> members;
};

// Groups tuples by the event window of their timestamp. Windows come back in
// start order and members in ingest-sequence order, so the result does not
// depend on the order of `tuples`. Untimed tuples are ignored.
std::vector<EventWindow> assign_windows(const std::vector<RawTuple>& tuples);

enum class ServingRate { max_speed, real_time };

struct ReadResult {
  enum class Status { tuple, end, error };
  Status status = Status::end;
  RawTuple tuple;
  std::string error;

  static ReadResult of(RawTuple t) { return {Status::tuple, std::move(t), {}}; }
  static ReadResult end_of_stream() { return {Status::end, {}, {}}; }
  static ReadResult failure(std::string msg) { return {Status::error, {}, std::move(msg)}; }
};

class StreamSource {
 public:
  virtual ~StreamSource() = default;
  // A failed read leaves the cursor past the offending record.
  virtual ReadResult read() = 0;
  virtual std::uint64_t cursor() const = 0;
};

// Replays an NDJSON or CSV capture. In real-time mode the source sleeps for the
// event-time gap between consecutive records, divided by `speedup`.
class ReplayFileSource final : public StreamSource {
 public:
  explicit ReplayFileSource(const std::filesystem::path& path,
                            ServingRate rate = ServingRate::max_speed, double speedup = 1.0);

  ReadResult read() override;
  std::uint64_t cursor() const override { return cursor_; }

 private:
  io::TupleFileReader reader_;
  ServingRate rate_;
  double speedup_;
  std::uint64_t cursor_ = 0;
  std::optional<EpochSeconds> last_event_;
};

// Serves an in-memory sequence, e.g. a synthetic stream.
class VectorSource final : public StreamSource {
 public:
  explicit VectorSource(std::vector<RawTuple> tuples) : tuples_(std::move(tuples)) {}

  ReadResult read() override;
  std::uint64_t cursor() const override { return cursor_; }

 private:
  std::vector<RawTuple> tuples_;
  std::uint64_t cursor_ = 0;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only tuple log with a (timestamp, seq) range index and a
// (TripKey, timestamp) secondary index.
class TupleStore {
 public:
  virtual ~TupleStore() = default;

  // Tuples keep the seq they carry. Throws StoreError on write failure.
  virtual void append(const std::vector<RawTuple>& tuples) = 0;

  virtual std::size_t size() const = 0;
  virtual std::uint64_t next_seq() const = 0;

  // Tuples with timestamp in [from, to), ascending by timestamp then seq.
  // Throws std::invalid_argument when from > to.
  virtual std::vector<RawTuple> query_range(EpochSeconds from, EpochSeconds to) const = 0;
  virtual std::vector<RawTuple> query_trip(const TripKey& key) const = 0;
  // Every record in append order, including untimed ones.
  virtual std::vector<RawTuple> scan_all() const = 0;
};

class MemoryTupleStore : public TupleStore {
 public:
  void append(const std::vector<RawTuple>& tuples) override;
  std::size_t size() const override { return log_.size(); }
  std::uint64_t next_seq() const override { return next_seq_; }
  std::vector<RawTuple> query_range(EpochSeconds from, EpochSeconds to) const override;
  std::vector<RawTuple> query_trip(const TripKey& key) const override;
  std::vector<RawTuple> scan_all() const override { return log_; }

 private:
  std::vector<RawTuple> log_;
  std::uint64_t next_seq_ = 0;
};

// Directory layout: `tuples.ndjson` holds one record per line in append order
// (with `_seq`/`_late` bookkeeping); `tuples.idx` is the tab-separated sidecar
// index (seq, byte offset, byte length, timestamp, route, trip). The data line
// is flushed before its index line, so readers opening the store see a
// consistent prefix.
class FileTupleStore final : public TupleStore {
 public:
  static constexpr const char* kDataFile = "tuples.ndjson";
  static constexpr const char* kIndexFile = "tuples.idx";

  explicit FileTupleStore(const std::filesystem::path& dir);

  void append(const std::vector<RawTuple>& tuples) override;
  std::size_t size() const override { return entries_.size(); }
  std::uint64_t next_seq() const override { return next_seq_; }
  std::vector<RawTuple> query_range(EpochSeconds from, EpochSeconds to) const override;
  std::vector<RawTuple> query_trip(const TripKey& key) const override;
  std::vector<RawTuple> scan_all() const override;

  // Re-reads the index written so far, e.g. by another process.
  void refresh();
  const std::filesystem::path& directory() const { return dir_; }

 private:
  struct Entry {
    std::uint64_t seq = 0;
    std::uint64_t offset = 0;
    std::uint32_t length = 0;
    std::optional<EpochSeconds> timestamp;
    std::optional<TripKey> key;
  };

  std::vector<RawTuple> load(const std::vector<const Entry*>& entries) const;
  void ensure_sorted() const;

  std::filesystem::path dir_;
  std::ofstream data_out_;
  std::ofstream index_out_;
  std::vector<Entry> entries_;
  std::uint64_t data_size_ = 0;
  std::uint64_t next_seq_ = 0;
  mutable std::vector<std::size_t> by_time_;  // entry indices sorted by (timestamp, seq)
  mutable bool sorted_ = true;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{5};
};

struct StopCondition {
  std::optional<std::size_t> max_tuples;
  std::optional<std::chrono::milliseconds> max_wall_time;
};

struct IngestOptions {
  ServingRate mode = ServingRate::max_speed;
  // Real-time mode only: a window closes once the event-time watermark (max
  // event time seen minus this lateness) passes its end.
  EpochSeconds allowed_lateness_s = 60;
  RetryPolicy retry;
  StopCondition stop;
  std::function<void(const EventWindow&)> on_window_closed;
};

struct IngestSummary {
  std::size_t tuples = 0;
  std::size_t windows = 0;
  std::size_t late_tuples = 0;
  std::size_t untimed_tuples = 0;
  std::size_t read_errors = 0;
  std::size_t gaps = 0;  // error runs that outlived the retry budget
  bool aborted = false;
  std::string error;

  nlohmann::ordered_json to_json() const;
};

// Pulls tuples until end of stream or the stop condition, assigns them to
// 5-second event windows, and appends closed windows to the store. A store
// failure aborts the loop; the summary then reflects what was persisted.
IngestSummary ingest_loop(StreamSource& source, TupleStore& store, const IngestOptions& options = {});

}  // namespace transit::ingest
