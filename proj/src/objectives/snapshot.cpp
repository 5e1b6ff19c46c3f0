#include <bit>
#include <cstring>

#include <json.hpp>

#include "signflow/objectives.hpp"

namespace signflow {

namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr const char* kSchema = "signflow.snapshot/1";

static_assert(std::endian::native == std::endian::little,
              "snapshot encoding assumes a little-endian host");

json encode_matrix(const Matrix& m) {
  std::string bytes;
  bytes.resize(static_cast<std::size_t>(m.size()) * sizeof(double));
  std::size_t off = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      std::memcpy(bytes.data() + off, &v, sizeof(double));
      off += sizeof(double);
    }
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", base64_encode(bytes)}};
}

Matrix decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const std::string bytes = base64_decode(j.at("data").get<std::string>());
  if (rows < 0 || cols < 0 ||
      bytes.size() != static_cast<std::size_t>(rows * cols) * sizeof(double)) {
    throw ConfigError("snapshot: matrix payload size does not match its shape");
  }
  Matrix m(rows, cols);
  std::size_t off = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      double v = 0.0;
      std::memcpy(&v, bytes.data() + off, sizeof(double));
      m(r, c) = v;
      off += sizeof(double);
    }
  }
  return m;
}

int decode_char(char ch) {
  if (ch >= 'A' && ch <= 'Z') return ch - 'A';
  if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
  if (ch >= '0' && ch <= '9') return ch - '0' + 52;
  if (ch == '+') return 62;
  if (ch == '/') return 63;
  return -1;
}

}  // namespace

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
    const auto b2 = static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)];
    out += kAlphabet[((b1 & 0xF) << 2) | (b2 >> 6)];
    out += kAlphabet[b2 & 0x3F];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[(b0 & 0x3) << 4];
    out += "==";
  } else if (rest == 2) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    const auto b1 = static_cast<unsigned char>(bytes[i + 1]);
    out += kAlphabet[b0 >> 2];
    out += kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)];
    out += kAlphabet[(b1 & 0xF) << 2];
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw ConfigError("base64: length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      if (ch == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
      } else {
        if (pad > 0) throw ConfigError("base64: data after padding");
        v[k] = decode_char(ch);
        if (v[k] < 0) throw ConfigError("base64: invalid character");
      }
    }
    const std::uint32_t word = (static_cast<std::uint32_t>(v[0]) << 18) |
                               (static_cast<std::uint32_t>(v[1]) << 12) |
                               (static_cast<std::uint32_t>(v[2]) << 6) |
                               static_cast<std::uint32_t>(v[3]);
    out += static_cast<char>((word >> 16) & 0xFF);
    if (pad < 2) out += static_cast<char>((word >> 8) & 0xFF);
    if (pad < 1) out += static_cast<char>(word & 0xFF);
  }
  return out;
}

std::string export_snapshot(const ProblemInstance& inst) {
  const ProblemSpec& s = inst.spec;
  json spec{{"kind", to_string(s.kind)},
            {"n", s.n},
            {"d", s.d},
            {"gamma", s.gamma},
            {"lambda", s.lambda},
            {"kappa", s.kappa},
            {"seed", s.seed},
            {"bound", s.bound == CurvatureBound::Certified ? "certified" : "table"}};
  if (s.dataset_path) spec["dataset_path"] = *s.dataset_path;
  json mats = json::object();
  if (inst.A.size() > 0) mats["A"] = encode_matrix(inst.A);
  if (inst.B.size() > 0) mats["B"] = encode_matrix(inst.B);
  if (inst.Q.size() > 0) mats["Q"] = encode_matrix(inst.Q);
  if (inst.labels.size() > 0) mats["labels"] = encode_matrix(inst.labels);
  if (inst.sep_lipschitz.size() > 0) mats["sep_lipschitz"] = encode_matrix(inst.sep_lipschitz);
  if (inst.sep_center.size() > 0) mats["sep_center"] = encode_matrix(inst.sep_center);
  json doc{{"schema", kSchema}, {"spec", spec}, {"matrices", mats}};
  return doc.dump(2) + "\n";
}

ProblemInstance import_snapshot(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kSchema) {
      throw ConfigError("snapshot: unsupported schema " + doc.at("schema").dump());
    }
    const json& js = doc.at("spec");
    ProblemInstance inst;
    ProblemSpec& s = inst.spec;
    s.kind = parse_problem_kind(js.at("kind").get<std::string>());
    s.n = js.at("n").get<int>();
    s.d = js.at("d").get<int>();
    s.gamma = js.at("gamma").get<double>();
    s.lambda = js.at("lambda").get<double>();
    s.kappa = js.at("kappa").get<double>();
    s.seed = js.at("seed").get<std::uint64_t>();
    s.bound = js.at("bound").get<std::string>() == "table" ? CurvatureBound::Table
                                                           : CurvatureBound::Certified;
    if (js.contains("dataset_path")) s.dataset_path = js.at("dataset_path").get<std::string>();
    const json& mats = doc.at("matrices");
    auto vec = [&](const char* key) -> Vector {
      const Matrix m = decode_matrix(mats.at(key));
      return Eigen::Map<const Vector>(m.data(), m.size());
    };
    if (mats.contains("A")) inst.A = decode_matrix(mats.at("A"));
    if (mats.contains("B")) inst.B = decode_matrix(mats.at("B"));
    if (mats.contains("Q")) inst.Q = decode_matrix(mats.at("Q"));
    if (mats.contains("labels")) inst.labels = vec("labels");
    if (mats.contains("sep_lipschitz")) inst.sep_lipschitz = vec("sep_lipschitz");
    if (mats.contains("sep_center")) inst.sep_center = vec("sep_center");
    return inst;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("snapshot: ") + e.what());
  }
}

}  // namespace signflow
