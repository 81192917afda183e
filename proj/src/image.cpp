#include "sedge/image.hpp"

#include <cmath>
#include <stdexcept>

namespace sedge {

Image Image::zeros(int height, int width, int n_planes) {
  Image img;
  img.planes.assign(n_planes, FloatPlane::Zero(height, width));
  return img;
}

void Image::validate() const {
  if (planes.empty()) throw std::invalid_argument("image has no planes");
  for (const auto& p : planes) {
    if (p.rows() != planes[0].rows() || p.cols() != planes[0].cols())
      throw std::invalid_argument("image planes differ in size");
    if (!p.allFinite() || (p.size() > 0 && (p.minCoeff() < 0.0f || p.maxCoeff() > 1.0f)))
      throw std::invalid_argument("image values must be finite and in [0,1]");
  }
}

Image pad_reflect(const Image& img, const Padding& pad) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const auto& p : img.planes) out.planes.push_back(pad_reflect(p, pad));
  return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  Image out;
  out.planes.reserve(img.planes.size());
  for (const auto& p : img.planes) out.planes.push_back(resize_bilinear(p, out_h, out_w));
  return out;
}

}  // namespace sedge
