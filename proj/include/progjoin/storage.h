#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "progjoin/cost_clock.h"

namespace progjoin {

inline constexpr std::size_t kDefaultPartitionSize = 320;

struct Tuple {
  std::uint64_t key = 0;
  // Present only for relations generated in string-key mode.
  std::optional<std::string> skey;
  std::vector<std::byte> payload;
};

struct Partition {
  std::size_t index = 0;
  std::vector<Tuple> tuples;

  std::size_t size() const { return tuples.size(); }
};

// Immutable, fully in-memory relation split into consecutive fixed-size
// partitions. Partitions are the unit of both I/O and learning.
class RelationStore {
 public:
  RelationStore() = default;
  RelationStore(std::string name, std::vector<Tuple> tuples,
                std::size_t partition_size);

  const std::string& name() const { return name_; }
  std::size_t partition_size() const { return partition_size_; }
  std::size_t tuple_count() const { return tuple_count_; }
  std::size_t partition_count() const { return partitions_.size(); }
  std::span<const Partition> partitions() const { return partitions_; }
  const Partition& partition(std::size_t i) const { return partitions_[i]; }
  bool empty() const { return partitions_.empty(); }

  // Flattened tuples in file order.
  std::vector<Tuple> Tuples() const;

  // New store holding the same tuples in a seeded random order.
  RelationStore Reshuffled(std::uint64_t seed) const;

 private:
  std::string name_;
  std::size_t partition_size_ = kDefaultPartitionSize;
  std::size_t tuple_count_ = 0;
  std::vector<Partition> partitions_;
};

struct ScanCursor {
  std::size_t position = 0;
  bool wrap_enabled = false;
  std::size_t wraps = 0;
};

// Reads `key,skey,payload_len` rows; see README for the format.
RelationStore LoadRelation(const std::filesystem::path& path,
                           std::size_t partition_size,
                           std::string name = {});

void WriteRelation(const std::filesystem::path& path,
                   std::span<const Tuple> tuples);

// Next partition in index order, or nullptr at end of relation (cursor
// without wrap). A wrapping cursor restarts from 0 and never ends unless the
// store is empty. Charges one sequential page per returned partition.
const Partition* SequentialNext(const RelationStore& store, ScanCursor& cursor,
                                CostClock& clock);

// Charges one random page. Throws AddressError when out of range.
const Partition& RandomAccess(const RelationStore& store, std::size_t address,
                              CostClock& clock);

}  // namespace progjoin
