#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "towscan/boxes.hpp"
#include "towscan/roc.hpp"
#include "towscan/tow_geometry.hpp"

namespace towscan {

/// {"horizontal_edges":[...], "vertical_bounds":[l,r], "centerlines":[{"row","x_start","x_end","tow_index"}]}
std::string layout_to_json(const TowLayout& layout);
TowLayout layout_from_json(const std::string& text);
void save_layout(const TowLayout& layout, const std::filesystem::path& path);
TowLayout load_layout(const std::filesystem::path& path);

/// {"boxes":[{"x","y","w","h","tow","sigma","response"}]}; ground-truth boxes
/// carry a "label" field instead of sigma/response.
std::string boxes_to_json(const std::vector<DefectBox>& boxes);
std::vector<DefectBox> boxes_from_json(const std::string& text);
void save_boxes(const std::vector<DefectBox>& boxes, const std::filesystem::path& path);
std::vector<DefectBox> load_boxes(const std::filesystem::path& path);

/// Undefined metrics are written as null.
std::string report_to_json(const ClassificationReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace towscan
