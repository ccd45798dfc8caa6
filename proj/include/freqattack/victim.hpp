#pragma once

#include "freqattack/image.hpp"

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace freqattack {

struct VictimCapabilities {
  std::string name;
  bool differentiable = false;
  bool thread_safe = false;
  std::optional<int> expected_views;  // nullopt: any view count
};

/// An image-to-image reconstruction model seen only through its inputs and
/// re-rendered outputs (one output view per input view).
class Victim {
 public:
  virtual ~Victim() = default;

  virtual VictimCapabilities capabilities() const = 0;

  /// Throws ViewCountMismatch when the view count differs from
  /// expected_views, and ConfigError for pixels outside [0,1].
  ImageSet render(const ImageSet& inputs) const;

  /// Vector-Jacobian product of render at `inputs` with `upstream`. Throws
  /// Unsupported unless the victim is differentiable.
  ImageSet render_grad(const ImageSet& inputs, const ImageSet& upstream) const;

 protected:
  virtual ImageSet do_render(const ImageSet& inputs) const = 0;
  virtual ImageSet do_render_grad(const ImageSet& inputs, const ImageSet& upstream) const;
};

struct TracePoint {
  std::uint64_t query = 0;
  double loss = 0.0;

  bool operator==(const TracePoint&) const = default;
};

/// Counts victim queries made on behalf of one attack and records the loss
/// trace against the query axis. Safe to update from concurrent renders.
class QueryLedger {
 public:
  QueryLedger() = default;
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  std::uint64_t query_count() const { return count_.load(); }
  void add_query() { ++count_; }

  /// Appends (current query count, loss).
  void record_loss(double loss);
  std::vector<TracePoint> trace() const;

 private:
  std::atomic<std::uint64_t> count_{0};
  mutable std::mutex mutex_;
  std::vector<TracePoint> trace_;
};

/// victim.render(inputs), counted in `ledger`.
ImageSet render(const Victim& victim, const ImageSet& inputs, QueryLedger& ledger);

}  // namespace freqattack
