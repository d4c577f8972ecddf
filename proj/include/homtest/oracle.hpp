#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "homtest/errors.hpp"
#include "homtest/instance.hpp"

namespace homtest {

// Query interface a tester sees: the value of the hidden assignment at a
// vertex. Adapters stack on top of the root oracle; every adapted access costs
// exactly one access of the layer below.
class VertexOracle {
 public:
  virtual ~VertexOracle() = default;
  virtual int value(int v) = 0;
};

// Root oracle over a concrete assignment. Counts total accesses and distinct
// queried vertices, and logs first accesses in order.
class CountingOracle final : public VertexOracle {
 public:
  explicit CountingOracle(const Assignment& f)
      : f_(&f), seen_(f.values.size(), 0) {}

  int value(int v) override {
    ++accesses_;
    if (!seen_[v]) {
      seen_[v] = 1;
      log_.push_back(v);
    }
    return (*f_)[v];
  }

  std::size_t distinct_queries() const { return log_.size(); }
  std::size_t total_accesses() const { return accesses_; }
  const std::vector<int>& query_log() const { return log_; }

 private:
  const Assignment* f_;
  std::vector<char> seen_;
  std::vector<int> log_;
  std::size_t accesses_ = 0;
};

// f'(v): the underlying value if the list at v allows it, otherwise the
// smallest listed value. Used after a list check has already charged for the
// violating mass.
class ListRepairOracle final : public VertexOracle {
 public:
  ListRepairOracle(VertexOracle& inner, const Instance& inst)
      : inner_(&inner), inst_(&inst) {}

  int value(int v) override {
    const int x = inner_->value(v);
    return inst_->in_list(v, x) ? x : inst_->list_min(v);
  }

 private:
  VertexOracle* inner_;
  const Instance* inst_;
};

// Post-composes the assignment with a target-side map (value table).
class MappedOracle final : public VertexOracle {
 public:
  MappedOracle(VertexOracle& inner, std::vector<int> table)
      : inner_(&inner), table_(std::move(table)) {}

  int value(int v) override { return table_.at(inner_->value(v)); }

 private:
  VertexOracle* inner_;
  std::vector<int> table_;
};

// Re-indexes queries of a restricted instance back to the original vertices.
class SubsetOracle final : public VertexOracle {
 public:
  SubsetOracle(VertexOracle& inner, std::vector<int> origin)
      : inner_(&inner), origin_(std::move(origin)) {}

  int value(int v) override { return inner_->value(origin_.at(v)); }

 private:
  VertexOracle* inner_;
  std::vector<int> origin_;
};

}  // namespace homtest
