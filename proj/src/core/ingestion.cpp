#include "transit/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>
#include <thread>

namespace transit::ingest {

EpochSeconds window_start(EpochSeconds t) {
  EpochSeconds q = t / kWindowWidthS;
  if (t % kWindowWidthS != 0 && t < 0) --q;
  return q * kWindowWidthS;
}

std::vector<EventWindow> assign_windows(const std::vector<RawTuple>& tuples) {
  std::map<EpochSeconds, std::vector<RawTuple>> by_start;
  for (const auto& t : tuples) {
    if (!t.timestamp) continue;
    by_start[window_start(*t.timestamp)].push_back(t);
  }
  std::vector<EventWindow> out;
  out.reserve(by_start.size());
  for (auto& [start, members] : by_start) {
    std::sort(members.begin(), members.end(),
              [](const RawTuple& a, const RawTuple& b) { return a.seq < b.seq; });
    out.push_back({start, start + kWindowWidthS, std::move(members)});
  }
  return out;
}

ReplayFileSource::ReplayFileSource(const std::filesystem::path& path, ServingRate rate, double speedup)
    : reader_(path), rate_(rate), speedup_(speedup > 0 ? speedup : 1.0) {}

ReadResult ReplayFileSource::read() {
  std::optional<RawTuple> t;
  try {
    t = reader_.next();
  } catch (const std::exception& e) {
    ++cursor_;
    return ReadResult::failure(e.what());
  }
  if (!t) return ReadResult::end_of_stream();
  ++cursor_;
  if (rate_ == ServingRate::real_time && t->timestamp) {
    if (last_event_ && *t->timestamp > *last_event_) {
      // Cap the pause so a large hole in a capture does not stall a replay.
      const double gap = std::min<double>(static_cast<double>(*t->timestamp - *last_event_), 60.0);
      std::this_thread::sleep_for(std::chrono::duration<double>(gap / speedup_));
    }
    if (!last_event_ || *t->timestamp > *last_event_) last_event_ = t->timestamp;
  }
  return ReadResult::of(std::move(*t));
}

ReadResult VectorSource::read() {
  if (cursor_ >= tuples_.size()) return ReadResult::end_of_stream();
  return ReadResult::of(tuples_[cursor_++]);
}

// ---------------------------------------------------------------------------

void MemoryTupleStore::append(const std::vector<RawTuple>& tuples) {
  for (const auto& t : tuples) {
    log_.push_back(t);
    next_seq_ = std::max(next_seq_, t.seq + 1);
  }
}

std::vector<RawTuple> MemoryTupleStore::query_range(EpochSeconds from, EpochSeconds to) const {
  if (from > to) throw std::invalid_argument("query_range: from > to");
  std::vector<RawTuple> out;
  for (const auto& t : log_) {
    if (t.timestamp && *t.timestamp >= from && *t.timestamp < to) out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(), [](const RawTuple& a, const RawTuple& b) {
    return std::tie(*a.timestamp, a.seq) < std::tie(*b.timestamp, b.seq);
  });
  return out;
}

std::vector<RawTuple> MemoryTupleStore::query_trip(const TripKey& key) const {
  std::vector<RawTuple> out;
  for (const auto& t : log_) {
    if (auto k = trip_key_of(t); k && *k == key) out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(), [](const RawTuple& a, const RawTuple& b) {
    return std::tie(*a.timestamp, a.seq) < std::tie(*b.timestamp, b.seq);
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string index_line(std::uint64_t seq, std::uint64_t offset, std::size_t length, const RawTuple& t) {
  std::ostringstream ss;
  ss << seq << '\t' << offset << '\t' << length << '\t';
  if (t.timestamp) ss << *t.timestamp;
  ss << '\t';
  if (auto key = trip_key_of(t)) ss << key->route_id << '\t' << key->trip_id;
  else ss << '\t';
  ss << '\n';
  return ss.str();
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

FileTupleStore::FileTupleStore(const std::filesystem::path& dir) : dir_(dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StoreError("cannot create store directory " + dir_.string() + ": " + ec.message());
  for (const char* f : {kDataFile, kIndexFile}) {
    const auto p = dir_ / f;
    if (!std::filesystem::exists(p)) {
      std::ofstream create(p, std::ios::binary | std::ios::app);
      if (!create) throw StoreError("cannot create " + p.string());
    }
  }
  refresh();
}

void FileTupleStore::refresh() {
  entries_.clear();
  next_seq_ = 0;
  data_size_ = std::filesystem::file_size(dir_ / kDataFile);
  std::ifstream idx(dir_ / kIndexFile, std::ios::binary);
  if (!idx) throw StoreError("cannot read index in " + dir_.string());
  std::string content((std::istreambuf_iterator<char>(idx)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // partially written tail
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 6) throw StoreError("corrupt index line in " + dir_.string());
    Entry e;
    if (!parse_number(cols[0], e.seq) || !parse_number(cols[1], e.offset) ||
        !parse_number(cols[2], e.length)) {
      throw StoreError("corrupt index line in " + dir_.string());
    }
    if (e.offset + e.length > data_size_) break;  // data not yet visible
    if (!cols[3].empty()) {
      EpochSeconds ts = 0;
      if (!parse_number(cols[3], ts)) throw StoreError("corrupt index timestamp");
      e.timestamp = ts;
      if (!cols[4].empty()) e.key = TripKey{std::string(cols[4]), std::string(cols[5]), utc_date(ts)};
    }
    next_seq_ = std::max(next_seq_, e.seq + 1);
    entries_.push_back(std::move(e));
  }
  by_time_.clear();
  sorted_ = false;
}

void FileTupleStore::append(const std::vector<RawTuple>& tuples) {
  if (tuples.empty()) return;
  std::string data;
  std::string index;
  std::vector<Entry> added;
  std::uint64_t offset = data_size_;
  for (const auto& t : tuples) {
    std::string line = io::to_ndjson_line(t, true);
    index += index_line(t.seq, offset, line.size(), t);
    Entry e{t.seq, offset, static_cast<std::uint32_t>(line.size()), t.timestamp, trip_key_of(t)};
    added.push_back(std::move(e));
    offset += line.size() + 1;
    data += line;
    data += '\n';
  }
  if (!data_out_.is_open()) data_out_.open(dir_ / kDataFile, std::ios::binary | std::ios::app);
  if (!index_out_.is_open()) index_out_.open(dir_ / kIndexFile, std::ios::binary | std::ios::app);
  data_out_ << data;
  data_out_.flush();
  if (!data_out_) throw StoreError("write failed: " + (dir_ / kDataFile).string());
  index_out_ << index;
  index_out_.flush();
  if (!index_out_) throw StoreError("write failed: " + (dir_ / kIndexFile).string());
  data_size_ = offset;
  for (auto& e : added) {
    next_seq_ = std::max(next_seq_, e.seq + 1);
    entries_.push_back(std::move(e));
  }
  sorted_ = false;
}

void FileTupleStore::ensure_sorted() const {
  if (sorted_) return;
  by_time_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].timestamp) by_time_.push_back(i);
  }
  std::stable_sort(by_time_.begin(), by_time_.end(), [this](std::size_t a, std::size_t b) {
    return std::tie(*entries_[a].timestamp, entries_[a].seq) <
           std::tie(*entries_[b].timestamp, entries_[b].seq);
  });
  sorted_ = true;
}

std::vector<RawTuple> FileTupleStore::load(const std::vector<const Entry*>& entries) const {
  std::vector<RawTuple> out;
  out.reserve(entries.size());
  std::ifstream in(dir_ / kDataFile, std::ios::binary);
  if (!in) throw StoreError("cannot read " + (dir_ / kDataFile).string());
  std::string buf;
  for (const Entry* e : entries) {
    buf.resize(e->length);
    in.seekg(static_cast<std::streamoff>(e->offset));
    in.read(buf.data(), e->length);
    if (!in) throw StoreError("truncated data file in " + dir_.string());
    out.push_back(io::raw_from_ndjson_line(buf, e->seq));
  }
  return out;
}

std::vector<RawTuple> FileTupleStore::query_range(EpochSeconds from, EpochSeconds to) const {
  if (from > to) throw std::invalid_argument("query_range: from > to");
  ensure_sorted();
  auto lo = std::lower_bound(by_time_.begin(), by_time_.end(), from,
                             [this](std::size_t i, EpochSeconds v) { return *entries_[i].timestamp < v; });
  auto hi = std::lower_bound(lo, by_time_.end(), to,
                             [this](std::size_t i, EpochSeconds v) { return *entries_[i].timestamp < v; });
  std::vector<const Entry*> picked;
  for (auto it = lo; it != hi; ++it) picked.push_back(&entries_[*it]);
  return load(picked);
}

std::vector<RawTuple> FileTupleStore::query_trip(const TripKey& key) const {
  ensure_sorted();
  std::vector<const Entry*> picked;
  for (std::size_t i : by_time_) {
    if (entries_[i].key && *entries_[i].key == key) picked.push_back(&entries_[i]);
  }
  return load(picked);
}

std::vector<RawTuple> FileTupleStore::scan_all() const {
  std::vector<const Entry*> all;
  all.reserve(entries_.size());
  for (const auto& e : entries_) all.push_back(&e);
  return load(all);
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json IngestSummary::to_json() const {
  nlohmann::ordered_json j;
  j["tuples"] = tuples;
  j["windows"] = windows;
  j["late_tuples"] = late_tuples;
  j["untimed_tuples"] = untimed_tuples;
  j["read_errors"] = read_errors;
  j["gaps"] = gaps;
  j["aborted"] = aborted;
  if (!error.empty()) j["error"] = error;
  return j;
}

namespace {

class WindowBuffer {
 public:
  void add(RawTuple t) {
    const EpochSeconds start = window_start(*t.timestamp);
    open_[start].push_back(std::move(t));
  }

  bool is_closed(EpochSeconds start) const { return closed_.count(start) != 0; }

  // Windows whose end is at or before `watermark`, oldest first.
  std::vector<EventWindow> take_closable(std::optional<EpochSeconds> watermark) {
    std::vector<EventWindow> out;
    while (!open_.empty()) {
      auto it = open_.begin();
      if (watermark && it->first + kWindowWidthS > *watermark) break;
      std::sort(it->second.begin(), it->second.end(),
                [](const RawTuple& a, const RawTuple& b) { return a.seq < b.seq; });
      out.push_back({it->first, it->first + kWindowWidthS, std::move(it->second)});
      closed_.insert(it->first);
      open_.erase(it);
    }
    return out;
  }

 private:
  std::map<EpochSeconds, std::vector<RawTuple>> open_;
  std::set<EpochSeconds> closed_;
};

}  // namespace

IngestSummary ingest_loop(StreamSource& source, TupleStore& store, const IngestOptions& options) {
  IngestSummary summary;
  WindowBuffer buffer;
  std::set<EpochSeconds> persisted_windows;
  std::vector<RawTuple> untimed;
  std::uint64_t next_seq = store.next_seq();
  std::optional<EpochSeconds> max_event;
  std::size_t accepted = 0;
  const auto started = std::chrono::steady_clock::now();
  const bool real_time = options.mode == ServingRate::real_time;

  auto persist = [&](const std::vector<RawTuple>& batch, std::optional<EpochSeconds> window) {
    store.append(batch);
    summary.tuples += batch.size();
    if (window) persisted_windows.insert(*window);
  };

  auto flush = [&](std::optional<EpochSeconds> watermark) {
    auto windows = buffer.take_closable(watermark);
    if (windows.empty()) return;
    std::vector<RawTuple> batch;
    for (const auto& w : windows) batch.insert(batch.end(), w.members.begin(), w.members.end());
    store.append(batch);
    summary.tuples += batch.size();
    for (const auto& w : windows) {
      persisted_windows.insert(w.start);
      if (options.on_window_closed) options.on_window_closed(w);
    }
  };

  auto should_stop = [&] {
    if (options.stop.max_tuples && accepted >= *options.stop.max_tuples) return true;
    if (options.stop.max_wall_time &&
        std::chrono::steady_clock::now() - started >= *options.stop.max_wall_time) {
      return true;
    }
    return false;
  };

  try {
    int consecutive_errors = 0;
    while (!should_stop()) {
      ReadResult r = source.read();
      if (r.status == ReadResult::Status::end) break;
      if (r.status == ReadResult::Status::error) {
        ++summary.read_errors;
        if (consecutive_errors >= options.retry.max_retries) {
          ++summary.gaps;
          consecutive_errors = 0;
          continue;
        }
        std::this_thread::sleep_for(options.retry.initial_backoff * (1 << consecutive_errors));
        ++consecutive_errors;
        continue;
      }
      consecutive_errors = 0;
      RawTuple t = std::move(r.tuple);
      t.seq = next_seq++;
      t.late = false;
      ++accepted;
      if (!t.timestamp) {
        ++summary.untimed_tuples;
        untimed.push_back(std::move(t));
        continue;
      }
      const EpochSeconds start = window_start(*t.timestamp);
      if (real_time && buffer.is_closed(start)) {
        t.late = true;
        ++summary.late_tuples;
        persist({t}, start);
        continue;
      }
      const EpochSeconds ts = *t.timestamp;
      buffer.add(std::move(t));
      if (real_time) {
        if (!max_event || ts > *max_event) max_event = ts;
        flush(*max_event - options.allowed_lateness_s);
      }
    }
    flush(std::nullopt);
    if (!untimed.empty()) persist(untimed, std::nullopt);
  } catch (const std::exception& e) {
    summary.aborted = true;
    summary.error = e.what();
  }
  summary.windows = persisted_windows.size();
  return summary;
}

}  // namespace transit::ingest
