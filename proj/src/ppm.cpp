#include "swarmchem/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>

namespace swarmchem::metrics {

void write_ppm(std::ostream& out, const Bitmap& bitmap) {
  out << "P6\n# step " << bitmap.step() << '\n'
      << bitmap.width() << ' ' << bitmap.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bitmap.bytes().data()),
            static_cast<std::streamsize>(bitmap.bytes().size()));
  if (!out) throw MetricError("ppm write failed");
}

void write_ppm(const std::filesystem::path& path, const Bitmap& bitmap) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MetricError("cannot open " + path.string() + " for writing");
  write_ppm(out, bitmap);
}

namespace {

/// Next header token, collecting "# step" comments on the way.
std::string header_token(std::istream& in, std::uint64_t& step) {
  std::string token;
  while (true) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) break;
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      if (comment.rfind(" step ", 0) == 0) step = std::stoull(comment.substr(6));
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

Bitmap read_ppm(std::istream& in) {
  std::uint64_t step = 0;
  if (header_token(in, step) != "P6") throw MetricError("not a binary PPM (P6)");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(header_token(in, step));
    height = std::stoi(header_token(in, step));
    maxval = std::stoi(header_token(in, step));
  } catch (const std::exception&) {
    throw MetricError("malformed PPM header");
  }
  if (maxval != 255) throw MetricError("only 8-bit PPM is supported");
  Bitmap bmp(width, height, step);
  auto& bytes = bmp.bytes();
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw MetricError("PPM pixel data truncated");
  }
  return bmp;
}

Bitmap read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MetricError("cannot open " + path.string());
  return read_ppm(in);
}

std::string snapshot_filename(std::uint64_t step) { return "snap_" + std::to_string(step) + ".ppm"; }

std::vector<Bitmap> load_snapshot_dir(const std::filesystem::path& dir) {
  static const std::regex pattern(R"(snap_(\d+)\.ppm)");
  std::vector<std::pair<std::uint64_t, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, m, pattern)) {
      files.emplace_back(std::stoull(m[1].str()), entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Bitmap> out;
  out.reserve(files.size());
  for (const auto& [step, path] : files) {
    auto bmp = read_ppm(path);
    bmp.set_step(step);
    out.push_back(std::move(bmp));
  }
  return out;
}

}  // namespace swarmchem::metrics
