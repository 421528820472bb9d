#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "smaxwell/fields.hpp"

namespace smaxwell
{

namespace
{

std::uint64_t to_little(std::uint64_t v)
{
  if constexpr (std::endian::native == std::endian::big)
  {
    return __builtin_bswap64(v);
  }
  return v;
}

}  // namespace

void write_field(const std::string &path, const GridSpec &g, const std::string &kind,
                 int components, std::span<const double> data)
{
  if (data.size() != g.sites() * static_cast<std::size_t>(components))
  {
    throw std::invalid_argument("write_field: data size does not match header");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os)
  {
    throw std::runtime_error("write_field: cannot open " + path);
  }
  nlohmann::ordered_json header;
  header["n"] = g.n;
  header["m"] = g.m;
  header["L"] = g.L;
  header["kind"] = kind;
  header["components"] = components;
  os << header.dump() << '\n';
  for (double v : data)
  {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = to_little(bits);
    os.write(reinterpret_cast<const char *>(&bits), sizeof bits);
  }
  if (!os)
  {
    throw std::runtime_error("write_field: write failed for " + path);
  }
}

void write_field(const std::string &path, const ScalarField &w)
{
  write_field(path, w.grid, "scalar", 1, w.values);
}

void write_field(const std::string &path, const OneForm &A)
{
  write_field(path, A.grid, "oneform", A.grid.n, A.data);
}

FieldDump read_field(const std::string &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
  {
    throw std::runtime_error("read_field: cannot open " + path);
  }
  std::string line;
  if (!std::getline(is, line))
  {
    throw std::runtime_error("read_field: missing header line");
  }
  FieldDump dump;
  try
  {
    const auto header = nlohmann::json::parse(line);
    dump.grid.n = header.at("n").get<int>();
    dump.grid.m = header.at("m").get<int>();
    dump.grid.L = header.at("L").get<double>();
    dump.kind = header.at("kind").get<std::string>();
    dump.components = header.at("components").get<int>();
  }
  catch (const nlohmann::json::exception &e)
  {
    throw std::runtime_error(std::string("read_field: bad header: ") + e.what());
  }
  try
  {
    dump.grid.validate();
  }
  catch (const std::invalid_argument &e)
  {
    throw std::runtime_error(std::string("read_field: ") + e.what());
  }
  if (dump.kind == "scalar")
  {
    if (dump.components != 1)
    {
      throw std::runtime_error("read_field: scalar dump must have 1 component");
    }
  }
  else if (dump.kind == "oneform")
  {
    if (dump.components != dump.grid.n)
    {
      throw std::runtime_error("read_field: oneform dump must have n components");
    }
  }
  else
  {
    throw std::runtime_error("read_field: unknown kind '" + dump.kind + "'");
  }
  const std::size_t count = dump.grid.sites() * static_cast<std::size_t>(dump.components);
  dump.data.resize(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    std::uint64_t bits;
    if (!is.read(reinterpret_cast<char *>(&bits), sizeof bits))
    {
      throw std::runtime_error("read_field: truncated payload");
    }
    bits = to_little(bits);
    std::memcpy(&dump.data[i], &bits, sizeof bits);
    if (!std::isfinite(dump.data[i]))
    {
      throw std::runtime_error("read_field: non-finite value in payload");
    }
  }
  if (is.peek() != std::char_traits<char>::eof())
  {
    throw std::runtime_error("read_field: trailing bytes after payload");
  }
  return dump;
}

SampledMagnitudes magnitudes(const FieldDump &dump)
{
  const std::size_t S = dump.grid.sites();
  SampledMagnitudes out{std::vector<double>(S, 0.0), dump.grid.cell_volume()};
  for (int c = 0; c < dump.components; ++c)
  {
    for (std::size_t s = 0; s < S; ++s)
    {
      const double v = dump.data[c * S + s];
      out.values[s] += v * v;
    }
  }
  for (auto &v : out.values)
  {
    v = std::sqrt(v);
  }
  return out;
}

}  // namespace smaxwell
