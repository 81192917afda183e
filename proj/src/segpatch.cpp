#include "sedge/segpatch.hpp"

#include <array>
#include <stdexcept>
#include <unordered_map>

namespace sedge {

SegPatch::SegPatch(int side, std::span<const std::uint8_t> ids) : side_(side), ids_(ids.size()) {
  if (side <= 0 || ids.size() != static_cast<size_t>(side) * side)
    throw std::invalid_argument("segpatch size mismatch");
  std::array<int, 256> remap;
  remap.fill(-1);
  int next = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    int& m = remap[ids[i]];
    if (m < 0) m = next++;
    ids_[i] = static_cast<std::uint8_t>(m);
  }
  n_segments_ = next;
}

SegPatch SegPatch::from_window(const LabelMap& labels, int row, int col, int side) {
  if (row < 0 || col < 0 || row + side > labels.rows() || col + side > labels.cols())
    throw std::out_of_range("segpatch window outside label map");
  std::unordered_map<std::int32_t, int> remap;
  std::vector<std::uint8_t> ids(static_cast<size_t>(side) * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      auto [it, inserted] = remap.try_emplace(labels(row + r, col + c), static_cast<int>(remap.size()));
      if (it->second > 255) throw std::invalid_argument("segpatch holds more than 256 segments");
      ids[r * side + c] = static_cast<std::uint8_t>(it->second);
    }
  return SegPatch(side, ids);
}

int EdgePatch::count() const {
  int n = 0;
  for (auto b : bits) n += b;
  return n;
}

EdgePatch derive_edges(const SegPatch& y) {
  const int d = y.side();
  EdgePatch e{d, std::vector<std::uint8_t>(static_cast<size_t>(d) * d, 0)};
  if (y.n_segments() <= 1) return e;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      const bool left = c > 0 && y(r, c) != y(r, c - 1);
      const bool up = r > 0 && y(r, c) != y(r - 1, c);
      e.bits[r * d + c] = (left || up) ? 1 : 0;
    }
  return e;
}

}  // namespace sedge
