#include "gesticulate/bvh.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

struct TokenStream {
  std::vector<std::string> tokens;
  std::size_t pos = 0;

  explicit TokenStream(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
  }

  bool done() const { return pos >= tokens.size(); }

  const std::string& peek() const {
    if (done()) throw SchemaError("bvh: unexpected end of file");
    return tokens[pos];
  }

  std::string next() {
    if (done()) throw SchemaError("bvh: unexpected end of file");
    return tokens[pos++];
  }

  void expect(const std::string& want) {
    std::string got = next();
    if (got != want) throw SchemaError("bvh: expected '" + want + "', found '" + got + "'");
  }

  double number() {
    std::string tok = next();
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      throw SchemaError("bvh: expected a number, found '" + tok + "'");
    }
  }
};

BvhChannel parse_channel(const std::string& name) {
  if (name == "Xposition") return BvhChannel::Xposition;
  if (name == "Yposition") return BvhChannel::Yposition;
  if (name == "Zposition") return BvhChannel::Zposition;
  if (name == "Xrotation") return BvhChannel::Xrotation;
  if (name == "Yrotation") return BvhChannel::Yrotation;
  if (name == "Zrotation") return BvhChannel::Zrotation;
  throw SchemaError("bvh: unknown channel '" + name + "'");
}

const char* channel_name(BvhChannel ch) {
  switch (ch) {
    case BvhChannel::Xposition: return "Xposition";
    case BvhChannel::Yposition: return "Yposition";
    case BvhChannel::Zposition: return "Zposition";
    case BvhChannel::Xrotation: return "Xrotation";
    case BvhChannel::Yrotation: return "Yrotation";
    case BvhChannel::Zrotation: return "Zrotation";
  }
  return "?";
}

// Parses one JOINT/ROOT block, appending to data.joints.
void parse_joint(TokenStream& ts, BvhData& data, int parent, int& channel_cursor) {
  std::string name = ts.next();
  int index = static_cast<int>(data.joints.size());
  data.joints.push_back({});
  {
    BvhJoint& j = data.joints.back();
    j.name = name;
    j.parent = parent;
  }

  ts.expect("{");
  ts.expect("OFFSET");
  {
    double x = ts.number(), y = ts.number(), z = ts.number();
    data.joints[static_cast<std::size_t>(index)].offset = Eigen::Vector3d(x, y, z);
  }

  while (true) {
    std::string tok = ts.next();
    if (tok == "}") break;
    if (tok == "CHANNELS") {
      int n = static_cast<int>(ts.number());
      BvhJoint& j = data.joints[static_cast<std::size_t>(index)];
      j.channel_start = channel_cursor;
      for (int i = 0; i < n; ++i) j.channels.push_back(parse_channel(ts.next()));
      channel_cursor += n;
    } else if (tok == "JOINT") {
      parse_joint(ts, data, index, channel_cursor);
    } else if (tok == "End") {
      ts.expect("Site");
      ts.expect("{");
      ts.expect("OFFSET");
      double x = ts.number(), y = ts.number(), z = ts.number();
      BvhJoint& j = data.joints[static_cast<std::size_t>(index)];
      j.end_site = Eigen::Vector3d(x, y, z);
      j.has_end_site = true;
      ts.expect("}");
    } else {
      throw SchemaError("bvh: unexpected token '" + tok + "' inside joint '" + name + "'");
    }
  }
}

void write_joint(std::ostream& out, const BvhData& data, int index, int depth) {
  const BvhJoint& j = data.joints[static_cast<std::size_t>(index)];
  std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  out << indent << (j.parent < 0 ? "ROOT " : "JOINT ") << j.name << "\n" << indent << "{\n";
  std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%sOFFSET %.6f %.6f %.6f\n", inner.c_str(), j.offset.x(),
                j.offset.y(), j.offset.z());
  out << buf;
  out << inner << "CHANNELS " << j.channels.size();
  for (BvhChannel ch : j.channels) out << " " << channel_name(ch);
  out << "\n";

  bool has_child = false;
  for (std::size_t k = 0; k < data.joints.size(); ++k)
    if (data.joints[k].parent == index) {
      write_joint(out, data, static_cast<int>(k), depth + 1);
      has_child = true;
    }
  if (!has_child) {
    Eigen::Vector3d site = j.has_end_site ? j.end_site : Eigen::Vector3d::Zero();
    std::snprintf(buf, sizeof(buf), "%sEnd Site\n%s{\n%s  OFFSET %.6f %.6f %.6f\n%s}\n",
                  inner.c_str(), inner.c_str(), inner.c_str(), site.x(), site.y(), site.z(),
                  inner.c_str());
    out << buf;
  }
  out << indent << "}\n";
}

}  // namespace

int BvhData::joint_index(const std::string& name) const {
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == name) return static_cast<int>(i);
  return -1;
}

BvhData parse_bvh(const std::string& text) {
  TokenStream ts(text);
  BvhData data;
  ts.expect("HIERARCHY");
  ts.expect("ROOT");
  int channel_cursor = 0;
  parse_joint(ts, data, -1, channel_cursor);

  ts.expect("MOTION");
  ts.expect("Frames:");
  int n_frames = static_cast<int>(ts.number());
  if (n_frames < 0) throw SchemaError("bvh: negative frame count");
  ts.expect("Frame");
  ts.expect("Time:");
  data.frame_time = ts.number();
  if (data.frame_time <= 0) throw SchemaError("bvh: frame time must be positive");

  data.frames.resize(n_frames, channel_cursor);
  for (int f = 0; f < n_frames; ++f)
    for (int c = 0; c < channel_cursor; ++c) data.frames(f, c) = ts.number();
  if (!ts.done())
    throw SchemaError("bvh: trailing data after " + std::to_string(n_frames) + " frames");
  return data;
}

BvhData read_bvh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_bvh(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string format_bvh(const BvhData& data) {
  std::ostringstream out;
  out << "HIERARCHY\n";
  write_joint(out, data, 0, 0);
  out << "MOTION\n";
  out << "Frames: " << data.frames.rows() << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "Frame Time: %.8f\n", data.frame_time);
  out << buf;
  for (Eigen::Index f = 0; f < data.frames.rows(); ++f) {
    for (Eigen::Index c = 0; c < data.frames.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.6f", data.frames(f, c));
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  return out.str();
}

void write_bvh(const std::filesystem::path& path, const BvhData& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_bvh(data);
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace gesticulate
