#include "botdna/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "botdna/error.hpp"
#include "botdna/png.hpp"

namespace botdna {

namespace {

constexpr std::string_view kMagic = "BWTS1";

static_assert(std::endian::native == std::endian::little,
              "tensor container I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("tensor container truncated while reading ") + what, 0);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const std::vector<NamedTensor>& entries) {
  std::string out(kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, tensor] : entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  for (const auto& entry : entries) {
    const Shape& shape = entry.second.shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put<std::uint64_t>(out, d);
  }
  for (const auto& entry : entries) {
    for (double v : entry.second.values()) put<double>(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_tensors(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size(), "magic") != kMagic) {
    throw ParseError("not a BWTS1 tensor container (bad magic)", 0);
  }
  const auto count = in.get<std::uint32_t>("entry count");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = in.get<std::uint32_t>("name length");
    names.emplace_back(in.take(len, "name"));
  }
  std::vector<Shape> shapes;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rank = in.get<std::uint32_t>("rank");
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(static_cast<std::size_t>(in.get<std::uint64_t>("dimension")));
    }
    shapes.push_back(std::move(shape));
  }
  std::vector<NamedTensor> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t n = shape_size(shapes[i]);
    const auto raw = in.take(n * sizeof(double), "payload");
    std::vector<double> values(n);
    if (n > 0) std::memcpy(values.data(), raw.data(), raw.size());
    entries.emplace_back(names[i], Tensor(shapes[i], std::move(values)));
  }
  if (!in.done()) throw ParseError("trailing bytes after tensor container payload", 0);
  return entries;
}

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
  write_binary_file(path, encode_tensors(entries));
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  try {
    return decode_tensors(read_binary_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::vector<NamedTensor> snapshot(const ParameterSet& params) {
  std::vector<NamedTensor> out;
  for (const Parameter* p : params.all()) out.emplace_back(p->name, p->value);
  return out;
}

void restore(ParameterSet& params, const std::vector<NamedTensor>& entries) {
  auto all = params.all();
  if (all.size() != entries.size()) {
    throw Error("checkpoint holds " + std::to_string(entries.size()) + " tensors, model has " +
                std::to_string(all.size()));
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i]->name != entries[i].first || all[i]->value.shape() != entries[i].second.shape()) {
      throw Error("checkpoint entry '" + entries[i].first + "' " +
                  shape_string(entries[i].second.shape()) + " does not match parameter '" +
                  all[i]->name + "' " + shape_string(all[i]->value.shape()));
    }
  }
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = entries[i].second;
}

}  // namespace botdna
