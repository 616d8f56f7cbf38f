#include "gesticulate/array_io.hpp"

#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "gesticulate/errors.hpp"

namespace gesticulate {

namespace {

using nlohmann::json;

json sidecar_to_json(const ArraySidecar& m) {
  json j;
  j["dtype"] = m.dtype;
  j["shape"] = m.shape;
  if (m.fps > 0) j["fps"] = m.fps;
  if (!m.words.empty()) j["words"] = m.words;
  if (!m.filler_vector.empty()) j["filler_vector"] = m.filler_vector;
  if (!m.mean.empty()) j["mean"] = m.mean;
  if (!m.explained_variance_ratio.empty())
    j["explained_variance_ratio"] = m.explained_variance_ratio;
  if (!m.note.empty()) j["note"] = m.note;
  return j;
}

ArraySidecar sidecar_from_json(const json& j) {
  ArraySidecar m;
  if (!j.contains("dtype") || !j.contains("shape"))
    throw SchemaError("array sidecar: missing dtype or shape");
  m.dtype = j.at("dtype").get<std::string>();
  m.shape = j.at("shape").get<std::vector<std::size_t>>();
  if (j.contains("fps")) m.fps = j.at("fps").get<double>();
  if (j.contains("words")) m.words = j.at("words").get<std::vector<std::string>>();
  if (j.contains("filler_vector"))
    m.filler_vector = j.at("filler_vector").get<std::vector<double>>();
  if (j.contains("mean")) m.mean = j.at("mean").get<std::vector<double>>();
  if (j.contains("explained_variance_ratio"))
    m.explained_variance_ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
  if (j.contains("note")) m.note = j.at("note").get<std::string>();
  return m;
}

std::size_t element_size(const std::string& dtype) {
  if (dtype == "float64") return 8;
  if (dtype == "float32") return 4;
  throw SchemaError("array sidecar: unsupported dtype '" + dtype + "'");
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
  std::filesystem::path p = bin_path;
  p.replace_extension(".json");
  return p;
}

void save_array(const std::filesystem::path& bin_path, const Eigen::MatrixXd& rows,
                ArraySidecar meta) {
  if (meta.shape.empty())
    meta.shape = {static_cast<std::size_t>(rows.rows()), static_cast<std::size_t>(rows.cols())};
  std::size_t count = 1;
  for (std::size_t s : meta.shape) count *= s;
  if (count != static_cast<std::size_t>(rows.size()))
    throw ShapeError("save_array: shape does not match element count");

  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + bin_path.string());
  if (meta.dtype == "float64") {
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
      for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        double v = rows(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  } else if (meta.dtype == "float32") {
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
      for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        float v = static_cast<float>(rows(r, c));
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  } else {
    throw SchemaError("save_array: unsupported dtype '" + meta.dtype + "'");
  }
  if (!out) throw IoError("short write to " + bin_path.string());
  out.close();

  std::ofstream side(sidecar_path(bin_path));
  if (!side) throw IoError("cannot write " + sidecar_path(bin_path).string());
  side << sidecar_to_json(meta).dump(2) << "\n";
}

LoadedArray load_array(const std::filesystem::path& bin_path) {
  std::ifstream side(sidecar_path(bin_path));
  if (!side) throw IoError("missing sidecar " + sidecar_path(bin_path).string());
  json j;
  try {
    side >> j;
  } catch (const json::exception& e) {
    throw SchemaError("bad sidecar " + sidecar_path(bin_path).string() + ": " + e.what());
  }
  LoadedArray result;
  result.meta = sidecar_from_json(j);

  std::size_t count = 1;
  for (std::size_t s : result.meta.shape) count *= s;
  std::size_t expected_bytes = count * element_size(result.meta.dtype);

  std::ifstream in(bin_path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("missing array file " + bin_path.string());
  std::size_t actual = static_cast<std::size_t>(in.tellg());
  if (actual != expected_bytes)
    throw SchemaError("array file " + bin_path.string() + ": expected " +
                      std::to_string(expected_bytes) + " bytes, found " + std::to_string(actual));
  in.seekg(0);

  std::size_t n_rows = result.meta.shape.empty() ? 1 : result.meta.shape[0];
  std::size_t n_cols = count / std::max<std::size_t>(n_rows, 1);
  if (result.meta.shape.size() == 1) {
    n_rows = 1;
    n_cols = count;
  }
  result.data.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));

  if (result.meta.dtype == "float64") {
    std::vector<double> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected_bytes));
    for (std::size_t i = 0; i < count; ++i)
      result.data(static_cast<Eigen::Index>(i / n_cols), static_cast<Eigen::Index>(i % n_cols)) =
          buf[i];
  } else {
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(expected_bytes));
    for (std::size_t i = 0; i < count; ++i)
      result.data(static_cast<Eigen::Index>(i / n_cols), static_cast<Eigen::Index>(i % n_cols)) =
          static_cast<double>(buf[i]);
  }
  if (!in) throw IoError("short read from " + bin_path.string());
  return result;
}

}  // namespace gesticulate
