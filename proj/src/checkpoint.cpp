#include "pasnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "pasnet/errors.hpp"

namespace pasnet {

namespace {

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u16(std::string& out, std::uint16_t v) {
  put_u8(out, static_cast<std::uint8_t>(v & 0xff));
  put_u8(out, static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) put_u8(out, static_cast<std::uint8_t>((v >> (8 * k)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t uint(std::size_t width, const char* what) {
    need(width, what);
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < width; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    pos_ += width;
    return v;
  }

  std::string_view take(std::size_t len, const char* what) {
    need(len, what);
    std::string_view s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t len, const char* what) {
    if (bytes_.size() - pos_ < len) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what + " at byte " +
                        std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename T>
std::string save_checkpoint(const ParamStore<T>& store) {
  std::string out(kCheckpointMagic);
  put_u16(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const Parameter<T>& p = store[i];
    if (p.name.size() > std::numeric_limits<std::uint16_t>::max()) throw UsageError("tensor name too long");
    put_u16(out, static_cast<std::uint16_t>(p.name.size()));
    out += p.name;
    put_u8(out, static_cast<std::uint8_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t k = 0; k < p.value.size(); ++k) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(p.value[k])));
  }
  return out;
}

std::vector<NamedTensor> load_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.remaining() < kCheckpointMagic.size() || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not a checkpoint: bad magic");
  }
  r.take(kCheckpointMagic.size(), "magic");
  const std::uint32_t version = r.uint(2, "version");
  if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = r.uint(4, "tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint32_t len = r.uint(2, "name length");
    t.name = std::string(r.take(len, "name"));
    const std::uint32_t rank = r.uint(1, "rank");
    Shape shape;
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(r.uint(4, "dimension"));
      total *= shape.back();
    }
    if (total > r.remaining() / 4) throw FormatError("checkpoint truncated in tensor " + t.name);
    std::vector<float> data(total);
    for (std::size_t k = 0; k < total; ++k) data[k] = std::bit_cast<float>(r.uint(4, "data"));
    t.value = Tensor<float>(std::move(shape), std::move(data));
    out.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError("checkpoint has " + std::to_string(r.remaining()) + " trailing bytes");
  return out;
}

template <typename T>
void load_checkpoint_into(ParamStore<T>& store, std::string_view bytes) {
  std::vector<NamedTensor> tensors = load_checkpoint(bytes);
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store[i].name;
    const bool present = std::any_of(tensors.begin(), tensors.end(), [&](const NamedTensor& t) { return t.name == name; });
    if (!present) throw FormatError("checkpoint lacks model tensor " + name);
  }
  if (tensors.size() != store.size()) {
    throw FormatError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                      std::to_string(store.size()));
  }
  for (const auto& t : tensors) {
    const Parameter<T>* p = store.find(t.name);
    if (!p) throw FormatError("checkpoint tensor " + t.name + " is not a model parameter");
    if (p->value.shape() != t.value.shape()) {
      throw FormatError("checkpoint tensor " + t.name + " has shape " + shape_string(t.value.shape()) +
                        ", model expects " + shape_string(p->value.shape()));
    }
  }
  for (const auto& t : tensors) store.find(t.name)->value = t.value.template cast<T>();
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path);
}

template std::string save_checkpoint<float>(const ParamStore<float>&);
template std::string save_checkpoint<double>(const ParamStore<double>&);
template void load_checkpoint_into<float>(ParamStore<float>&, std::string_view);
template void load_checkpoint_into<double>(ParamStore<double>&, std::string_view);

}  // namespace pasnet
