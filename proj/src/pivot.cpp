#include "nwrdb/pivot.hpp"

namespace nwrdb {

Word128 encode(const PivotVersionObject& p) {
  Word128 w = p.epoch;
  w |= static_cast<Word128>(p.pv) << 32;
  w |= static_cast<Word128>(p.mrs) << 64;
  w |= static_cast<Word128>(p.mws) << 96;
  return w;
}

PivotVersionObject decode(Word128 w) {
  PivotVersionObject p;
  p.epoch = static_cast<uint32_t>(w);
  p.pv = static_cast<uint32_t>(w >> 32);
  p.mrs = static_cast<uint32_t>(w >> 64);
  p.mws = static_cast<uint32_t>(w >> 96);
  return p;
}

uint64_t key_hash(uint64_t key) { return key; }

uint64_t key_hash(const std::string& key) {
  // FNV-1a
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint32_t slot_of_hash(uint64_t h) {
  return static_cast<uint32_t>((h * 0x9E3779B97F4A7C15ull) >> 61);
}

namespace {

uint32_t merged(uint32_t existing, uint32_t vn) {
  uint32_t v = saturate4(vn);
  if (existing == 0) return v;
  return existing < v ? existing : v;
}

}  // namespace

PivotVersionObject merge_read(PivotVersionObject p, uint32_t slot, uint32_t vn) {
  if (vn == 0) return p;
  p.set_mrs_slot(slot, merged(p.mrs_slot(slot), vn));
  return p;
}

PivotVersionObject merge_write(PivotVersionObject p, uint32_t slot, uint32_t vn) {
  if (vn == 0) return p;
  p.set_mws_slot(slot, merged(p.mws_slot(slot), vn));
  return p;
}

CompressedVerdict validate_compressed_one(const PivotVersionObject& obj,
                                          const TxnFootprint& fp) {
  if (obj.epoch != fp.epoch || obj.pv == 0) return CompressedVerdict::StFail;

  for (uint32_t k = 0; k < kSlotCount; ++k) {
    uint32_t ym = obj.mws_slot(k);
    if (ym == 0) continue;
    for (const FootprintEntry& zn : fp.reads) {
      if (zn.slot != k || zn.vn == 0) continue;
      if (ym <= zn.vn || zn.vn >= kSlotMax) return CompressedVerdict::MaybeCyclic;
    }
  }

  for (uint32_t k = 0; k < kSlotCount; ++k) {
    uint32_t yg = obj.mrs_slot(k);
    if (yg == 0) continue;
    for (const FootprintEntry& zj : fp.writes) {
      if (zj.slot != k) continue;
      if (yg < zj.vn || zj.vn >= kSlotMax) return CompressedVerdict::MaybeCyclic;
    }
  }
  return CompressedVerdict::MaybeAcyclic;
}

CompressedVerdict validate_compressed(
    const std::vector<PivotVersionObject>& ws_objects, const TxnFootprint& fp) {
  CompressedVerdict out = CompressedVerdict::MaybeAcyclic;
  for (const PivotVersionObject& obj : ws_objects) {
    CompressedVerdict v = validate_compressed_one(obj, fp);
    if (v == CompressedVerdict::StFail) return v;
    if (v == CompressedVerdict::MaybeCyclic) out = v;
  }
  return out;
}

PivotVersionObject apply_commit_updates(PivotVersionObject obj,
                                        const TxnFootprint& fp,
                                        uint32_t epoch_now,
                                        bool first_blind_write) {
  if (first_blind_write) {
    PivotVersionObject fresh;
    fresh.epoch = epoch_now;
    fresh.pv = 1;
    for (const FootprintEntry& r : fp.reads)
      fresh = merge_read(fresh, r.slot, r.vn);
    for (const FootprintEntry& w : fp.writes)
      fresh = merge_write(fresh, w.slot, w.vn);
    return fresh;
  }
  if (obj.epoch != epoch_now) return obj;
  for (const FootprintEntry& r : fp.reads) obj = merge_read(obj, r.slot, r.vn);
  for (const FootprintEntry& w : fp.writes)
    obj = merge_write(obj, w.slot, w.vn);
  return obj;
}

PivotVersionObject apply_read_merge(PivotVersionObject obj, uint32_t epoch_now,
                                    uint32_t slot, uint32_t vn) {
  if (obj.epoch != epoch_now) return obj;
  return merge_read(obj, slot, vn);
}

}  // namespace nwrdb
