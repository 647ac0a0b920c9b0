#include "paperfeed/store/kv.hpp"

#include <cstdint>
#include <cstring>

#include <glog/logging.h>

#include "paperfeed/common/errors.hpp"

namespace paperfeed::store {
namespace {

// Log record: "PFB1" magic, u32 op count, u64 FNV-1a checksum of the body,
// u64 body length, body. Body ops: u8 kind, u32 key length, u32 value
// length, key, value. Integers little-endian.
constexpr char kMagic[4] = {'P', 'F', 'B', '1'};

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

template <typename T>
bool get_le(std::string_view& in, T& value) {
  if (in.size() < sizeof(T)) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(static_cast<unsigned char>(in[i])) << (8 * i);
  in.remove_prefix(sizeof(T));
  return true;
}

std::string encode(const WriteBatch& batch) {
  std::string body;
  for (const auto& op : batch.ops()) {
    body.push_back(op.erase ? 'D' : 'P');
    put_le<std::uint32_t>(body, static_cast<std::uint32_t>(op.key.size()));
    put_le<std::uint32_t>(body, static_cast<std::uint32_t>(op.value.size()));
    body += op.key;
    body += op.value;
  }
  std::string record(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(record, static_cast<std::uint32_t>(batch.ops().size()));
  put_le<std::uint64_t>(record, fnv1a(body));
  put_le<std::uint64_t>(record, body.size());
  record += body;
  return record;
}

void apply_to_map(std::map<std::string, std::string, std::less<>>& map, const WriteBatch& batch) {
  for (const auto& op : batch.ops()) {
    if (op.erase) {
      if (auto it = map.find(op.key); it != map.end()) map.erase(it);
    } else {
      map.insert_or_assign(op.key, op.value);
    }
  }
}

}  // namespace

std::optional<std::string> MemoryKv::get(std::string_view key) const {
  const auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void MemoryKv::apply(const WriteBatch& batch) { apply_to_map(map_, batch); }

void MemoryKv::scan(std::string_view prefix, const ScanVisitor& visit) const {
  for (auto it = map_.lower_bound(prefix); it != map_.end() && it->first.starts_with(prefix); ++it) {
    if (!visit(it->first, it->second)) return;
  }
}

void MemoryKv::scan_reverse(std::string_view prefix, const ScanVisitor& visit) const {
  // Upper bound of the prefix range: prefix with its last non-0xff byte
  // incremented.
  std::string upper(prefix);
  while (!upper.empty() && static_cast<unsigned char>(upper.back()) == 0xff) upper.pop_back();
  auto end = map_.end();
  if (!upper.empty()) {
    upper.back() = static_cast<char>(static_cast<unsigned char>(upper.back()) + 1);
    end = map_.lower_bound(upper);
  }
  for (auto it = std::make_reverse_iterator(end); it != map_.rend(); ++it) {
    if (!it->first.starts_with(prefix)) break;
    if (!visit(it->first, it->second)) return;
  }
}

FileKv::FileKv(std::filesystem::path path) : path_(std::move(path)) {
  replay();
  log_.open(path_, std::ios::binary | std::ios::app);
  if (!log_) throw StoreUnavailable("cannot open store log " + path_.string());
}

void FileKv::replay() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string_view rest(data);
  std::size_t good_bytes = 0;
  while (!rest.empty()) {
    std::string_view cursor = rest;
    if (cursor.size() < sizeof kMagic || std::memcmp(cursor.data(), kMagic, sizeof kMagic) != 0) break;
    cursor.remove_prefix(sizeof kMagic);
    std::uint32_t op_count = 0;
    std::uint64_t checksum = 0;
    std::uint64_t body_len = 0;
    if (!get_le(cursor, op_count) || !get_le(cursor, checksum) || !get_le(cursor, body_len)) break;
    if (cursor.size() < body_len) break;
    std::string_view body = cursor.substr(0, body_len);
    if (fnv1a(body) != checksum) break;
    WriteBatch batch;
    bool ok = true;
    for (std::uint32_t i = 0; i < op_count && ok; ++i) {
      std::uint32_t klen = 0;
      std::uint32_t vlen = 0;
      if (body.empty()) {
        ok = false;
        break;
      }
      const char kind = body.front();
      body.remove_prefix(1);
      ok = get_le(body, klen) && get_le(body, vlen) && body.size() >= std::size_t{klen} + vlen;
      if (!ok) break;
      std::string key(body.substr(0, klen));
      std::string value(body.substr(klen, vlen));
      body.remove_prefix(std::size_t{klen} + vlen);
      if (kind == 'D') {
        batch.erase(std::move(key));
      } else {
        batch.put(std::move(key), std::move(value));
      }
    }
    if (!ok) break;
    apply_to_map(map_, batch);
    cursor.remove_prefix(body_len);
    good_bytes += rest.size() - cursor.size();
    rest = cursor;
  }
  if (good_bytes < data.size()) {
    LOG(WARNING) << "store log " << path_ << ": discarding " << (data.size() - good_bytes)
                 << " trailing bytes of an incomplete batch";
    in.close();
    std::filesystem::resize_file(path_, good_bytes);
  }
}

void FileKv::apply(const WriteBatch& batch) {
  if (batch.empty()) return;
  const std::string record = encode(batch);
  log_.write(record.data(), static_cast<std::streamsize>(record.size()));
  log_.flush();
  if (!log_) throw StoreUnavailable("write to store log " + path_.string() + " failed");
  apply_to_map(map_, batch);
}

void FileKv::compact() {
  WriteBatch snapshot;
  for (const auto& [key, value] : map_) snapshot.put(key, value);
  const auto tmp = path_.string() + ".compact";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const std::string record = encode(snapshot);
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
    if (!out) throw StoreUnavailable("cannot write " + tmp);
  }
  log_.close();
  std::filesystem::rename(tmp, path_);
  log_.open(path_, std::ios::binary | std::ios::app);
  if (!log_) throw StoreUnavailable("cannot reopen store log " + path_.string());
}

}  // namespace paperfeed::store
