#include "wander/nn/weights_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

namespace wander::nn {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename U>
void put(std::string& out, U value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(U)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    if (bytes_.size() - pos_ < sizeof(U))
      throw FormatError("weights file truncated at byte " + std::to_string(pos_));
    std::array<unsigned char, sizeof(U)> bits;
    std::memcpy(bits.data(), bytes_.data() + pos_, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
    pos_ += sizeof(U);
    return std::bit_cast<U>(bits);
  }

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw FormatError("weights file truncated at byte " + std::to_string(pos_));
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename T>
std::string save_weights(const CnnModel<T>& model) {
  const ModelConfig& c = model.config();
  std::string out(kWeightsMagic);
  put<std::uint32_t>(out, kWeightsVersion);
  for (int v : {c.input_height, c.input_width, c.kernel_size, c.filters, c.fc1_units, c.fc2_units})
    put<std::int32_t>(out, v);
  put<double>(out, c.dropout);
  const auto tensors = model.parameters().list();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor<T>* t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) put<std::uint64_t>(out, d);
    for (T v : t->values()) put<double>(out, static_cast<double>(v));
  }
  return out;
}

template <typename T>
CnnModel<T> load_weights(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kWeightsMagic.size() || r.take(kWeightsMagic.size()) != kWeightsMagic)
    throw FormatError("not a weights file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kWeightsVersion) throw FormatError("unsupported weights version " + std::to_string(version));
  ModelConfig c;
  c.input_height = r.get<std::int32_t>();
  c.input_width = r.get<std::int32_t>();
  c.kernel_size = r.get<std::int32_t>();
  c.filters = r.get<std::int32_t>();
  c.fc1_units = r.get<std::int32_t>();
  c.fc2_units = r.get<std::int32_t>();
  c.dropout = r.get<double>();
  try {
    c.check();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("weights file architecture invalid: ") + e.what());
  }
  const auto count = r.get<std::uint32_t>();
  if (count != Parameters<T>::kNames.size()) throw FormatError("weights file holds " + std::to_string(count) + " tensors");

  auto params = Parameters<T>::zeros(c);
  for (Tensor<T>* t : params.list()) {
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw FormatError("implausible tensor rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    if (shape != t->shape())
      throw ShapeError("stored tensor " + shape_string(shape) + " does not match architecture " +
                       shape_string(t->shape()));
    for (T& v : t->values()) v = static_cast<T>(r.get<double>());
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after weights payload");
  return CnnModel<T>(c, std::move(params));
}

template <typename T>
CnnModel<T> load_weights(std::string_view bytes, const ModelConfig& expected) {
  auto model = load_weights<T>(bytes);
  const ModelConfig& got = model.config();
  if (got.input_height != expected.input_height || got.input_width != expected.input_width ||
      got.kernel_size != expected.kernel_size || got.filters != expected.filters ||
      got.fc1_units != expected.fc1_units || got.fc2_units != expected.fc2_units)
    throw ShapeError("weights file architecture (fc1_units=" + std::to_string(got.fc1_units) +
                     ", fc2_units=" + std::to_string(got.fc2_units) + ", input " +
                     std::to_string(got.input_height) + "x" + std::to_string(got.input_width) +
                     ") does not match the configured model (fc1_units=" + std::to_string(expected.fc1_units) +
                     ", fc2_units=" + std::to_string(expected.fc2_units) + ")");
  return model;
}

template std::string save_weights<float>(const CnnModel<float>&);
template std::string save_weights<double>(const CnnModel<double>&);
template CnnModel<float> load_weights<float>(std::string_view);
template CnnModel<double> load_weights<double>(std::string_view);
template CnnModel<float> load_weights<float>(std::string_view, const ModelConfig&);
template CnnModel<double> load_weights<double>(std::string_view, const ModelConfig&);

}  // namespace wander::nn
