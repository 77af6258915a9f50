#include "towscan/serialize.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "towscan/error.hpp"

namespace towscan {

using ordered_json = nlohmann::ordered_json;

namespace {

nlohmann::json parse(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string(what) + ": " + e.what());
  }
}

ordered_json metric(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::string layout_to_json(const TowLayout& layout) {
  ordered_json j;
  j["horizontal_edges"] = layout.horizontal_edges;
  j["vertical_bounds"] = {layout.vertical_bounds.first, layout.vertical_bounds.second};
  auto& lines = j["centerlines"] = ordered_json::array();
  for (const auto& c : layout.centerlines) {
    lines.push_back({{"row", c.row}, {"x_start", c.x_start}, {"x_end", c.x_end}, {"tow_index", c.tow_index}});
  }
  return j.dump(1);
}

TowLayout layout_from_json(const std::string& text) {
  const auto j = parse(text, "layout");
  TowLayout layout;
  try {
    layout.horizontal_edges = j.at("horizontal_edges").get<std::vector<long>>();
    const auto bounds = j.at("vertical_bounds").get<std::vector<long>>();
    if (bounds.size() != 2) fail(ErrorCode::Format, "layout: vertical_bounds needs two entries");
    layout.vertical_bounds = {bounds[0], bounds[1]};
    for (const auto& c : j.at("centerlines")) {
      layout.centerlines.push_back({c.at("row").get<long>(), c.at("x_start").get<long>(), c.at("x_end").get<long>(),
                                    c.at("tow_index").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("layout: ") + e.what());
  }
  for (std::size_t k = 1; k < layout.horizontal_edges.size(); ++k) {
    if (layout.horizontal_edges[k] <= layout.horizontal_edges[k - 1]) {
      fail(ErrorCode::Format, "layout: horizontal_edges must be strictly increasing");
    }
  }
  return layout;
}

void save_layout(const TowLayout& layout, const std::filesystem::path& path) {
  write_text_file(path, layout_to_json(layout) + "\n");
}

TowLayout load_layout(const std::filesystem::path& path) { return layout_from_json(read_text_file(path)); }

std::string boxes_to_json(const std::vector<DefectBox>& boxes) {
  ordered_json j;
  auto& arr = j["boxes"] = ordered_json::array();
  for (const auto& b : boxes) {
    ordered_json e{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"tow", b.tow_index}};
    if (b.label.empty()) {
      e["sigma"] = b.sigma;
      e["response"] = b.response;
    } else {
      e["label"] = b.label;
    }
    arr.push_back(std::move(e));
  }
  return j.dump(1);
}

std::vector<DefectBox> boxes_from_json(const std::string& text) {
  const auto j = parse(text, "boxes");
  std::vector<DefectBox> boxes;
  try {
    for (const auto& e : j.at("boxes")) {
      DefectBox b;
      b.x = e.at("x").get<double>();
      b.y = e.at("y").get<double>();
      b.w = e.at("w").get<double>();
      b.h = e.at("h").get<double>();
      b.tow_index = e.at("tow").get<int>();
      b.sigma = e.value("sigma", 0.0);
      b.response = e.value("response", 0.0);
      b.label = e.value("label", std::string{});
      if (!(b.w > 0.0) || !(b.h > 0.0)) fail(ErrorCode::Format, "boxes: width and height must be positive");
      boxes.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("boxes: ") + e.what());
  }
  return boxes;
}

void save_boxes(const std::vector<DefectBox>& boxes, const std::filesystem::path& path) {
  write_text_file(path, boxes_to_json(boxes) + "\n");
}

std::vector<DefectBox> load_boxes(const std::filesystem::path& path) { return boxes_from_json(read_text_file(path)); }

std::string report_to_json(const ClassificationReport& r) {
  ordered_json j;
  j["threshold"] = r.threshold;
  j["precision"] = metric(r.precision);
  j["recall"] = metric(r.recall);
  j["f1"] = metric(r.f1);
  j["accuracy"] = metric(r.accuracy);
  j["auc"] = metric(r.auc);
  j["confusion"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  return j.dump(1);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace towscan
