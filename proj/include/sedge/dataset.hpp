#pragma once

#include "sedge/eval.hpp"
#include "sedge/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sedge {

/// On-disk layout: images/<id>.png and groundtruth/<id>/<annotator>.png
/// (single-channel PNGs of segment ids). Ids are sorted.
struct Dataset {
  std::filesystem::path root;
  std::vector<std::string> ids;
  std::vector<Image> images;
  std::vector<GroundTruth> truths;

  int size() const { return static_cast<int>(ids.size()); }
};

/// Throws IoError for a missing directory and DataError for an image
/// without ground truth or with mismatched sizes.
Dataset load_dataset(const std::filesystem::path& root, bool with_truth = true);

/// Image ids under root/images (sorted).
std::vector<std::string> list_image_ids(const std::filesystem::path& root);

void write_dataset(const std::filesystem::path& root, const std::vector<Image>& images,
                   const std::vector<GroundTruth>& truths, const std::vector<std::string>& ids);

}  // namespace sedge
