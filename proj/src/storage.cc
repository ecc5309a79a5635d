#include "progjoin/storage.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <string_view>

#include "progjoin/error.h"
#include "progjoin/rng.h"

namespace progjoin {

RelationStore::RelationStore(std::string name, std::vector<Tuple> tuples,
                             std::size_t partition_size)
    : name_(std::move(name)),
      partition_size_(partition_size),
      tuple_count_(tuples.size()) {
  if (partition_size == 0) {
    throw DomainError("partition_size must be at least 1");
  }
  partitions_.reserve((tuples.size() + partition_size - 1) / partition_size);
  for (std::size_t begin = 0; begin < tuples.size(); begin += partition_size) {
    const std::size_t end = std::min(tuples.size(), begin + partition_size);
    Partition p;
    p.index = partitions_.size();
    p.tuples.assign(std::make_move_iterator(tuples.begin() + begin),
                    std::make_move_iterator(tuples.begin() + end));
    partitions_.push_back(std::move(p));
  }
}

std::vector<Tuple> RelationStore::Tuples() const {
  std::vector<Tuple> out;
  out.reserve(tuple_count_);
  for (const auto& p : partitions_) {
    out.insert(out.end(), p.tuples.begin(), p.tuples.end());
  }
  return out;
}

RelationStore RelationStore::Reshuffled(std::uint64_t seed) const {
  auto tuples = Tuples();
  Rng rng(seed);
  rng.Shuffle(tuples);
  return RelationStore(name_, std::move(tuples), partition_size_);
}

namespace {

bool ParseCount(std::string_view field, std::uint64_t& out) {
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

Tuple ParseRow(std::string_view line, std::size_t row) {
  const auto c1 = line.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
  if (c2 == std::string_view::npos ||
      line.find(',', c2 + 1) != std::string_view::npos) {
    throw LoadError(row, "expected 3 comma-separated fields");
  }
  const auto key_field = line.substr(0, c1);
  const auto skey_field = line.substr(c1 + 1, c2 - c1 - 1);
  const auto len_field = line.substr(c2 + 1);

  Tuple t;
  if (!ParseCount(key_field, t.key)) {
    throw LoadError(row, "key is not a non-negative integer");
  }
  for (char c : skey_field) {
    if (!std::isalnum(static_cast<unsigned char>(c))) {
      throw LoadError(row, "skey is not alphanumeric");
    }
  }
  if (!skey_field.empty()) t.skey = std::string(skey_field);
  std::uint64_t len = 0;
  if (!ParseCount(len_field, len)) {
    throw LoadError(row, "payload_len is not a count");
  }
  t.payload.assign(len, std::byte{0});
  return t;
}

}  // namespace

RelationStore LoadRelation(const std::filesystem::path& path,
                           std::size_t partition_size, std::string name) {
  if (partition_size == 0) {
    throw DomainError("partition_size must be at least 1");
  }
  std::ifstream in(path);
  if (!in) {
    throw LoadError(0, "cannot open " + path.string());
  }
  std::vector<Tuple> tuples;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tuples.push_back(ParseRow(line, row));
  }
  if (name.empty()) name = path.stem().string();
  return RelationStore(std::move(name), std::move(tuples), partition_size);
}

void WriteRelation(const std::filesystem::path& path,
                   std::span<const Tuple> tuples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  for (const auto& t : tuples) {
    out << t.key << ',' << t.skey.value_or("") << ',' << t.payload.size()
        << '\n';
  }
}

const Partition* SequentialNext(const RelationStore& store, ScanCursor& cursor,
                                CostClock& clock) {
  if (store.empty()) return nullptr;
  if (cursor.position >= store.partition_count()) {
    if (!cursor.wrap_enabled) return nullptr;
    cursor.position = 0;
    ++cursor.wraps;
  }
  const Partition& p = store.partition(cursor.position++);
  ++clock.seq_pages;
  return &p;
}

const Partition& RandomAccess(const RelationStore& store, std::size_t address,
                              CostClock& clock) {
  if (address >= store.partition_count()) {
    throw AddressError("partition address " + std::to_string(address) +
                       " out of range [0, " +
                       std::to_string(store.partition_count()) + ")");
  }
  ++clock.rand_pages;
  return store.partition(address);
}

}  // namespace progjoin
