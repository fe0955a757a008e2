#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace nwrdb {

using Word128 = unsigned __int128;

inline constexpr uint32_t kSlotCount = 8;
inline constexpr uint32_t kSlotMax = 15;  // 4-bit saturation bound

// Per-item commit metadata published as one 128-bit word: the epoch and
// per-epoch version number of the pivot version, plus two 8-slot hash
// tables holding the lowest version numbers read (mrs) and written (mws)
// by transactions reachable from the pivot writer. pv == 0 means the item
// has no usable pivot this epoch.
struct PivotVersionObject {
  uint32_t epoch = 0;
  uint32_t pv = 0;
  uint32_t mrs = 0;
  uint32_t mws = 0;

  bool operator==(const PivotVersionObject&) const = default;

  uint32_t mrs_slot(uint32_t k) const { return (mrs >> (4 * k)) & 0xF; }
  uint32_t mws_slot(uint32_t k) const { return (mws >> (4 * k)) & 0xF; }
  void set_mrs_slot(uint32_t k, uint32_t v) {
    mrs = (mrs & ~(0xFu << (4 * k))) | ((v & 0xF) << (4 * k));
  }
  void set_mws_slot(uint32_t k, uint32_t v) {
    mws = (mws & ~(0xFu << (4 * k))) | ((v & 0xF) << (4 * k));
  }
};

// Lane layout: bits [0,32) epoch, [32,64) pv, [64,96) mrs, [96,128) mws.
Word128 encode(const PivotVersionObject& p);
PivotVersionObject decode(Word128 w);

uint64_t key_hash(uint64_t key);
uint64_t key_hash(const std::string& key);

// Top 3 bits of key_hash(key) * 0x9E3779B97F4A7C15.
uint32_t slot_of_hash(uint64_t h);
inline uint32_t slot_of(uint64_t key) { return slot_of_hash(key_hash(key)); }
inline uint32_t slot_of(const std::string& key) {
  return slot_of_hash(key_hash(key));
}

inline uint32_t saturate4(uint32_t vn) { return vn > kSlotMax ? kSlotMax : vn; }

// Slot keeps the lowest nonzero version number; vn == 0 entries are
// ignored (no in-epoch version number to record).
PivotVersionObject merge_read(PivotVersionObject p, uint32_t slot, uint32_t vn);
PivotVersionObject merge_write(PivotVersionObject p, uint32_t slot, uint32_t vn);

// One footprint entry of the committing transaction: the slot its item
// hashes to and its version number under the candidate order. Reads of
// versions older than every in-epoch version carry vn == 0.
struct FootprintEntry {
  uint32_t slot;
  uint32_t vn;
};

struct TxnFootprint {
  uint32_t epoch = 0;
  std::vector<FootprintEntry> reads;
  std::vector<FootprintEntry> writes;  // vn = pv of the item minus one
};

enum class CompressedVerdict { MaybeAcyclic, StFail, MaybeCyclic };

// Validation of one written item against its pivot object:
//   epoch mismatch (or missing pivot)             -> StFail
//   mws slot y_m vs colliding read z_n, y_m <= z_n
//     or z_n saturated                            -> MaybeCyclic
//   mrs slot y_g vs colliding write z_j, y_g < z_j
//     or z_j saturated                            -> MaybeCyclic
CompressedVerdict validate_compressed_one(const PivotVersionObject& obj,
                                          const TxnFootprint& fp);

// All written items; first non-pass verdict wins, StFail before MaybeCyclic.
CompressedVerdict validate_compressed(
    const std::vector<PivotVersionObject>& ws_objects, const TxnFootprint& fp);

// Commit-time object transform for one written item, per the control flow:
// first blind write of the epoch resets every field (pv = 1), otherwise the
// footprint merges into the existing tables.
PivotVersionObject apply_commit_updates(PivotVersionObject obj,
                                        const TxnFootprint& fp,
                                        uint32_t epoch_now,
                                        bool first_blind_write);

// Read-side merge (control-flow step 1): the version number of a read
// merges into its own item's mrs when the object is in the current epoch.
PivotVersionObject apply_read_merge(PivotVersionObject obj, uint32_t epoch_now,
                                    uint32_t slot, uint32_t vn);

}  // namespace nwrdb
