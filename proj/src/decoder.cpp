#include "lscae/decoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "lscae/error.hpp"
#include "lscae/kernels.hpp"

namespace lscae {

MlpDecoder MlpDecoder::initialize(std::size_t k, std::size_t d, RngStream& stream,
                                  const std::vector<std::size_t>& hidden, double slope) {
  if (k == 0 || d == 0) fail(ErrorKind::ConfigInvalid, "decoder dimensions must be positive");
  if (!(slope > 0.0 && slope < 1.0)) fail(ErrorKind::ConfigInvalid, "slope must lie in (0,1)");
  std::vector<std::size_t> dims{k};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(d);
  MlpDecoder dec;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l];
    const std::size_t out = dims[l + 1];
    DenseLayer layer{Matrix(out, in), std::vector<double>(out, 0.0),
                     l + 2 == dims.size() ? Activation::identity() : Activation::leaky_relu(slope)};
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : layer.w.values()) v = stream.uniform(-a, a);
    dec.layers.push_back(std::move(layer));
  }
  return dec;
}

void MlpDecoder::validate() const {
  if (layers.empty()) fail(ErrorKind::ConfigInvalid, "decoder has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.b.size() != layer.out()) fail(ErrorKind::ShapeMismatch, "bias length");
    if (l > 0 && layers[l - 1].out() != layer.in())
      fail(ErrorKind::ShapeMismatch, "layer dimensions do not chain");
  }
}

DecoderOutput decoder_forward(const MlpDecoder& dec, const Matrix& c) {
  if (c.cols() != dec.input_dim())
    fail(ErrorKind::ShapeMismatch, "decoder input has " + std::to_string(c.cols()) +
                                       " columns, expected " + std::to_string(dec.input_dim()));
  require_finite(c, "decoder input");
  DecoderOutput out;
  Matrix h = c;
  for (const DenseLayer& layer : dec.layers) {
    Matrix z = kernels::matmul_abt(h, layer.w);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto row = z.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.b[j];
    }
    Matrix a = z;
    if (layer.activation.kind != Activation::Kind::Identity)
      for (double& v : a.values()) v = layer.activation.apply(v);
    out.cache.inputs.push_back(std::move(h));
    out.cache.pre.push_back(std::move(z));
    h = std::move(a);
  }
  require_finite(h, "decoder output");
  out.xhat = std::move(h);
  return out;
}

DecoderGradients decoder_backward(const MlpDecoder& dec, const DecoderCache& cache,
                                  const Matrix& dxhat) {
  const std::size_t depth = dec.layers.size();
  if (cache.inputs.size() != depth || cache.pre.size() != depth)
    fail(ErrorKind::ShapeMismatch, "cache does not match decoder depth");
  require_same_shape(cache.pre.back(), dxhat, "dXhat");

  DecoderGradients g;
  g.dw.resize(depth);
  g.db.resize(depth);
  Matrix grad = dxhat;
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = dec.layers[l];
    const Matrix& pre = cache.pre[l];
    if (layer.activation.kind != Activation::Kind::Identity)
      for (std::size_t i = 0; i < grad.size(); ++i)
        grad.data()[i] *= layer.activation.derivative(pre.data()[i]);
    g.dw[l] = kernels::matmul_atb(grad, cache.inputs[l]);
    g.db[l].assign(layer.out(), 0.0);
    for (std::size_t i = 0; i < grad.rows(); ++i) {
      const auto row = grad.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) g.db[l][j] += row[j];
    }
    grad = kernels::matmul(grad, layer.w);
  }
  g.dc = std::move(grad);
  return g;
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state, double lr) {
  if (params.size() != grads.size()) fail(ErrorKind::ShapeMismatch, "param/grad block count");
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.size(), 0.0);
      state.second.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first.size() != params.size()) fail(ErrorKind::ShapeMismatch, "optimizer state blocks");
  for (std::size_t b = 0; b < params.size(); ++b)
    if (params[b].size() != grads[b].size() || state.first[b].size() != params[b].size())
      fail(ErrorKind::ShapeMismatch, "parameter block " + std::to_string(b) + " size");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first[b];
    auto& v = state.second[b];
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      const double g = grads[b][i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      params[b][i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
    }
  }
}

std::vector<std::span<double>> parameter_views(MlpDecoder& dec) {
  std::vector<std::span<double>> views;
  for (auto& layer : dec.layers) {
    views.emplace_back(layer.w.values());
    views.emplace_back(layer.b);
  }
  return views;
}

std::vector<std::span<const double>> gradient_views(const DecoderGradients& g) {
  std::vector<std::span<const double>> views;
  for (std::size_t l = 0; l < g.dw.size(); ++l) {
    views.emplace_back(g.dw[l].values());
    views.emplace_back(g.db[l]);
  }
  return views;
}

namespace {

constexpr char kMagic[8] = {'L', 'S', 'C', 'A', 'E', 'D', 'E', 'C'};

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) fail(ErrorKind::ParseError, "truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void save_decoder(const MlpDecoder& dec, const std::filesystem::path& path) {
  dec.validate();
  nlohmann::json header;
  header["format"] = "lscae-decoder";
  header["version"] = 1;
  header["dtype"] = "f64-le";
  for (const auto& layer : dec.layers) {
    header["layers"].push_back(
        {{"in", layer.in()},
         {"out", layer.out()},
         {"activation", layer.activation.kind == Activation::Kind::LeakyRelu ? "leaky_relu" : "identity"},
         {"slope", layer.activation.slope}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_u64_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& layer : dec.layers) {
    for (double v : layer.w.values()) write_u64_le(out, std::bit_cast<std::uint64_t>(v));
    for (double v : layer.b) write_u64_le(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

MlpDecoder load_decoder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorKind::ParseError, "bad checkpoint magic");
  const std::uint64_t len = read_u64_le(in);
  if (len > (1u << 24)) fail(ErrorKind::ParseError, "checkpoint header too large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) fail(ErrorKind::ParseError, "truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("checkpoint header: ") + e.what());
  }
  MlpDecoder dec;
  for (const auto& spec : header.at("layers")) {
    const std::size_t in_dim = spec.at("in").get<std::size_t>();
    const std::size_t out_dim = spec.at("out").get<std::size_t>();
    const Activation act = spec.at("activation").get<std::string>() == "leaky_relu"
                               ? Activation::leaky_relu(spec.at("slope").get<double>())
                               : Activation::identity();
    DenseLayer layer{Matrix(out_dim, in_dim), std::vector<double>(out_dim), act};
    for (double& v : layer.w.values()) v = std::bit_cast<double>(read_u64_le(in));
    for (double& v : layer.b) v = std::bit_cast<double>(read_u64_le(in));
    dec.layers.push_back(std::move(layer));
  }
  dec.validate();
  return dec;
}

}  // namespace lscae
