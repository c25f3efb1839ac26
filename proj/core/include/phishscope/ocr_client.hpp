#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "phishscope/snapshot.hpp"

namespace phishscope {

struct OcrServiceConfig {
  std::string endpoint;  // image-analysis URL (http)
  std::string api_key;   // from the environment; never logged
  std::chrono::milliseconds request_timeout = std::chrono::seconds(30);
};

struct OcrExtraction {
  std::vector<OcrLine> lines;         // service reading order
  std::vector<std::string> warnings;  // e.g. regions with missing geometry
};

// Posts the image to the OCR service and maps each returned region to an
// OcrLine. font_height is the bounding-box height; a region with missing
// geometry keeps its text with the documented default height 1 (lowest
// priority) and a warning.
// Errors: not_found (image file), service_unreachable, unsupported_image,
// quota_exceeded, invalid_config.
OcrExtraction extract_lines(const std::string& image_path,
                            const OcrServiceConfig& config);

}  // namespace phishscope
