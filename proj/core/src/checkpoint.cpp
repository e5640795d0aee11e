#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ssbench/models.hpp"

namespace ssbench {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "ckpt-v1";

json tensor_index(const TensorList& params, const std::vector<std::string>& names) {
  json tensors = json::array();
  for (std::size_t i = 0; i < params.size(); ++i)
    tensors.push_back({{"name", names[i]},
                       {"rows", params[i].rows()},
                       {"cols", params[i].cols()}});
  return tensors;
}

void write_container(const std::filesystem::path& path, json header,
                     const TensorList& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path.string());
  const std::string head = header.dump();
  const std::uint32_t len = static_cast<std::uint32_t>(head.size());
  unsigned char lenb[4] = {static_cast<unsigned char>(len & 0xff),
                           static_cast<unsigned char>((len >> 8) & 0xff),
                           static_cast<unsigned char>((len >> 16) & 0xff),
                           static_cast<unsigned char>((len >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(lenb), 4);
  os.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& t : params)
    for (Eigen::Index i = 0; i < t.rows(); ++i)
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        const float v = static_cast<float>(t(i, j));
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                              static_cast<unsigned char>((bits >> 8) & 0xff),
                              static_cast<unsigned char>((bits >> 16) & 0xff),
                              static_cast<unsigned char>((bits >> 24) & 0xff)};
        os.write(reinterpret_cast<const char*>(b), 4);
      }
  if (!os) throw Error("write failed: " + path.string());
}

json read_container(const std::filesystem::path& path, std::ifstream& is) {
  is.open(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path.string());
  unsigned char lenb[4];
  is.read(reinterpret_cast<char*>(lenb), 4);
  if (!is) throw Error(path.string() + ": truncated checkpoint header");
  const std::uint32_t len = static_cast<std::uint32_t>(lenb[0]) |
                            (static_cast<std::uint32_t>(lenb[1]) << 8) |
                            (static_cast<std::uint32_t>(lenb[2]) << 16) |
                            (static_cast<std::uint32_t>(lenb[3]) << 24);
  std::string head(len, '\0');
  is.read(head.data(), len);
  if (!is) throw Error(path.string() + ": truncated checkpoint header");
  json header = json::parse(head, nullptr, false);
  if (header.is_discarded()) throw Error(path.string() + ": malformed checkpoint header");
  if (header.value("version", "") != kVersion)
    throw Error(path.string() + ": unsupported checkpoint version");
  return header;
}

void read_blobs(const std::filesystem::path& path, std::ifstream& is, const json& header,
                TensorList& params, const std::vector<std::string>& names) {
  const auto& tensors = header.at("tensors");
  if (tensors.size() != params.size())
    throw Error(path.string() + ": tensor count mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto& entry = tensors[t];
    if (entry.at("name").get<std::string>() != names[t] ||
        entry.at("rows").get<Eigen::Index>() != params[t].rows() ||
        entry.at("cols").get<Eigen::Index>() != params[t].cols())
      throw Error(path.string() + ": tensor layout mismatch at \"" + names[t] + "\"");
    for (Eigen::Index i = 0; i < params[t].rows(); ++i)
      for (Eigen::Index j = 0; j < params[t].cols(); ++j) {
        unsigned char b[4];
        is.read(reinterpret_cast<char*>(b), 4);
        if (!is) throw Error(path.string() + ": truncated weight blob");
        const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                   (static_cast<std::uint32_t>(b[1]) << 8) |
                                   (static_cast<std::uint32_t>(b[2]) << 16) |
                                   (static_cast<std::uint32_t>(b[3]) << 24);
        float v;
        std::memcpy(&v, &bits, 4);
        params[t](i, j) = static_cast<double>(v);
      }
  }
}

}  // namespace

void save_classifier(const std::filesystem::path& path, const Classifier& model) {
  const ClassifierSpec& spec = model.spec();
  json header = {{"version", kVersion},
                 {"kind", "classifier"},
                 {"architecture", architecture_name(spec.architecture)},
                 {"widths", spec.widths},
                 {"head_width", spec.head_width},
                 {"num_classes", spec.num_classes},
                 {"knn_k", spec.knn_k},
                 {"tensors", tensor_index(model.params(), model.param_names())}};
  write_container(path, header, model.params());
}

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path) {
  std::ifstream is;
  const json header = read_container(path, is);
  if (header.value("kind", "") != "classifier")
    throw Error(path.string() + ": not a classifier checkpoint");
  ClassifierSpec spec;
  spec.architecture = architecture_from_name(header.at("architecture").get<std::string>());
  spec.widths = header.at("widths").get<std::vector<int>>();
  spec.head_width = header.at("head_width").get<int>();
  spec.num_classes = header.at("num_classes").get<int>();
  spec.knn_k = header.at("knn_k").get<int>();
  auto model = make_classifier(spec, 0);
  read_blobs(path, is, header, model->params(), model->param_names());
  return model;
}

void save_autoencoder(const std::filesystem::path& path, const Autoencoder& ae) {
  const AutoencoderSpec& spec = ae.spec();
  json header = {{"version", kVersion},
                 {"kind", "autoencoder"},
                 {"latent_dim", spec.latent_dim},
                 {"decoder_points", spec.decoder_points},
                 {"encoder_hidden", spec.encoder_hidden},
                 {"decoder_hidden", spec.decoder_hidden},
                 {"tensors", tensor_index(ae.params(), ae.param_names())}};
  write_container(path, header, ae.params());
}

std::unique_ptr<Autoencoder> load_autoencoder(const std::filesystem::path& path) {
  std::ifstream is;
  const json header = read_container(path, is);
  if (header.value("kind", "") != "autoencoder")
    throw Error(path.string() + ": not an autoencoder checkpoint");
  AutoencoderSpec spec;
  spec.latent_dim = header.at("latent_dim").get<int>();
  spec.decoder_points = header.at("decoder_points").get<int>();
  spec.encoder_hidden = header.at("encoder_hidden").get<int>();
  spec.decoder_hidden = header.at("decoder_hidden").get<int>();
  auto ae = std::make_unique<Autoencoder>(spec, 0);
  read_blobs(path, is, header, ae->params(), ae->param_names());
  return ae;
}

}  // namespace ssbench
