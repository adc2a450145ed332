#include "seld3d/codec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "seld3d/errors.hpp"
#include "seld3d/keyvalue.hpp"

namespace seld3d {

EncodedFrame encode(const FrameEvents& events, std::size_t num_classes) {
  EncodedFrame frame;
  frame.activity.assign(num_classes, 0.0);
  frame.targets.assign(num_classes, Vec3{});
  for (const LabeledEvent& e : events.entries) {
    if (e.class_id < 0 || static_cast<std::size_t>(e.class_id) >= num_classes) {
      throw OutOfBoundsError("encode: class_id " + std::to_string(e.class_id) +
                             " outside [0, " + std::to_string(num_classes) + ")");
    }
    const auto c = static_cast<std::size_t>(e.class_id);
    if (frame.activity[c] != 0.0) {
      throw DuplicateClassError("encode: class " + std::to_string(e.class_id) +
                                " appears twice in frame " +
                                std::to_string(events.frame_index));
    }
    frame.activity[c] = 1.0;
    frame.targets[c] = sph_to_cart(e.direction) * e.distance_m;
  }
  return frame;
}

FrameEvents decode(const ModelFrameOutput& out, std::size_t frame_index,
                   double sed_threshold) {
  FrameEvents events;
  events.frame_index = frame_index;
  const std::size_t n = std::min(out.sed.size(), out.sce.size());
  for (std::size_t c = 0; c < n; ++c) {
    if (out.sed[c] < sed_threshold) continue;
    const double len = out.sce[c].norm();
    if (len < kDecodeNormFloor) continue;
    const Spherical sph = cart_to_sph(out.sce[c]);
    events.entries.push_back({static_cast<int>(c), sph.direction, sph.length});
  }
  return events;
}

std::string format_label_csv(const LabelSequence& labels) {
  std::string out;
  for (const FrameEvents& frame : labels) {
    for (const LabeledEvent& e : frame.entries) {
      out += std::to_string(frame.frame_index);
      out += ',';
      out += std::to_string(e.class_id);
      out += ",0,";
      out += format_double(e.direction.azimuth_deg);
      out += ',';
      out += format_double(e.direction.elevation_deg);
      out += ',';
      out += format_double(e.distance_m);
      out += '\n';
    }
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_number(const std::string& s, const char* what, std::size_t line_no) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed != s.size() || s.empty()) {
    throw FormatError(std::string("label CSV line ") + std::to_string(line_no) +
                      ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

LabelSequence parse_label_csv(const std::string& text) {
  LabelSequence labels;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_fields(line);
    if (f.size() != 6) {
      throw FormatError("label CSV line " + std::to_string(line_no) + ": expected 6 fields, got " +
                        std::to_string(f.size()));
    }
    const double frame = parse_number(f[0], "frame index", line_no);
    const double cls = parse_number(f[1], "class id", line_no);
    parse_number(f[2], "source id", line_no);
    LabeledEvent e;
    e.direction.azimuth_deg = parse_number(f[3], "azimuth", line_no);
    e.direction.elevation_deg = parse_number(f[4], "elevation", line_no);
    e.distance_m = parse_number(f[5], "distance", line_no);
    if (frame < 0 || frame != std::floor(frame)) {
      throw FormatError("label CSV line " + std::to_string(line_no) + ": bad frame index");
    }
    if (cls < 0 || cls != std::floor(cls)) {
      throw FormatError("label CSV line " + std::to_string(line_no) + ": bad class id");
    }
    if (!(e.distance_m > 0.0)) {
      throw FormatError("label CSV line " + std::to_string(line_no) +
                        ": distance must be positive");
    }
    e.class_id = static_cast<int>(cls);
    const auto frame_index = static_cast<std::size_t>(frame);

    auto it = std::find_if(labels.begin(), labels.end(), [&](const FrameEvents& fe) {
      return fe.frame_index == frame_index;
    });
    if (it == labels.end()) {
      labels.push_back({frame_index, {e}});
    } else {
      for (const LabeledEvent& prev : it->entries) {
        if (prev.class_id == e.class_id) {
          throw DuplicateClassError("label CSV line " + std::to_string(line_no) +
                                    ": class " + std::to_string(e.class_id) +
                                    " repeated in frame " + std::to_string(frame_index));
        }
      }
      it->entries.push_back(e);
    }
  }
  std::sort(labels.begin(), labels.end(), [](const FrameEvents& a, const FrameEvents& b) {
    return a.frame_index < b.frame_index;
  });
  for (FrameEvents& frame : labels) {
    std::sort(frame.entries.begin(), frame.entries.end(),
              [](const LabeledEvent& a, const LabeledEvent& b) {
                return a.class_id < b.class_id;
              });
  }
  return labels;
}

LabelSequence read_label_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open label CSV: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_label_csv(buf.str());
}

void write_label_csv(const std::filesystem::path& path, const LabelSequence& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write label CSV: " + path.string());
  out << format_label_csv(labels);
  if (!out) throw IoError("short write to label CSV: " + path.string());
}

}  // namespace seld3d
