#include "sedge/dataset.hpp"

#include <algorithm>

namespace fs = std::filesystem;

namespace sedge {

std::vector<std::string> list_image_ids(const fs::path& root) {
  const fs::path dir = root / "images";
  if (!fs::is_directory(dir)) throw IoError("dataset has no images directory: " + dir.string());
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") ids.push_back(e.path().stem().string());
  std::sort(ids.begin(), ids.end());
  return ids;
}

Dataset load_dataset(const fs::path& root, bool with_truth) {
  Dataset ds;
  ds.root = root;
  ds.ids = list_image_ids(root);
  for (const auto& id : ds.ids) {
    Image img = read_png(root / "images" / (id + ".png"));
    if (with_truth) {
      const fs::path gdir = root / "groundtruth" / id;
      if (!fs::is_directory(gdir)) throw DataError("missing ground truth for image " + id);
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(gdir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      if (files.empty()) throw DataError("no annotator maps for image " + id);
      std::vector<LabelMap> segs;
      for (const auto& f : files) {
        segs.push_back(read_png_labels(f));
        if (segs.back().rows() != img.height() || segs.back().cols() != img.width())
          throw DataError("ground truth size differs from image " + id);
      }
      ds.truths.push_back(GroundTruth::from_segmentations(std::move(segs)));
    }
    ds.images.push_back(std::move(img));
  }
  return ds;
}

void write_dataset(const fs::path& root, const std::vector<Image>& images, const std::vector<GroundTruth>& truths,
                   const std::vector<std::string>& ids) {
  if (images.size() != ids.size() || truths.size() != ids.size())
    throw std::invalid_argument("write_dataset: size mismatch");
  std::error_code ec;
  fs::create_directories(root / "images", ec);
  if (ec) throw IoError("cannot create " + (root / "images").string() + ": " + ec.message());
  for (size_t i = 0; i < ids.size(); ++i) {
    write_png(root / "images" / (ids[i] + ".png"), images[i], 8);
    const fs::path gdir = root / "groundtruth" / ids[i];
    fs::create_directories(gdir, ec);
    if (ec) throw IoError("cannot create " + gdir.string() + ": " + ec.message());
    for (size_t a = 0; a < truths[i].segmentations.size(); ++a) {
      char name[16];
      std::snprintf(name, sizeof name, "%02zu.png", a);
      write_png_labels(gdir / name, truths[i].segmentations[a]);
    }
  }
}

}  // namespace sedge
