#include "hypolab/spectral.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hypolab {

// Text format:
//   # hypolab-tensor 1
//   label <text>
//   shape <n0> <n1> ...
//   <values, row-major, one per line>
void write_tensor(const std::string& path, const std::string& label, const std::vector<long>& shape,
                  const std::vector<double>& values) {
  long n = 1;
  for (long s : shape) n *= s;
  if (n != static_cast<long>(values.size())) throw ParameterError("spectral", "tensor shape/value count mismatch");
  std::ofstream out(path);
  if (!out) throw ParameterError("spectral", "cannot open " + path);
  out << "# hypolab-tensor 1\nlabel " << label << "\nshape";
  for (long s : shape) out << ' ' << s;
  out << '\n';
  char buf[64];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
}

void read_tensor(const std::string& path, std::string& label, std::vector<long>& shape,
                 std::vector<double>& values) {
  std::ifstream in(path);
  if (!in) throw ParameterError("spectral", "cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("# hypolab-tensor", 0) != 0) throw ParameterError("spectral", "not a tensor file: " + path);
  std::getline(in, line);
  label = line.size() > 6 ? line.substr(6) : "";
  std::getline(in, line);
  std::istringstream ss(line.substr(5));
  shape.clear();
  long s;
  long n = 1;
  while (ss >> s) {
    shape.push_back(s);
    n *= s;
  }
  values.resize(n);
  for (long i = 0; i < n; ++i)
    if (!(in >> values[i])) throw ParameterError("spectral", "truncated tensor file: " + path);
}

void dump_field(const std::string& path, const SpectralField& f, const std::string& label) {
  const TensorBasis& b = *f.basis;
  std::vector<long> shape{static_cast<long>(f.comp.size())};
  for (int a = 0; a < b.dim(); ++a) shape.push_back(b.N());
  for (int a = 0; a < b.dim(); ++a) shape.push_back(b.r().axis_size(a));
  std::vector<double> v;
  for (const auto& c : f.comp) v.insert(v.end(), c.data(), c.data() + c.size());
  write_tensor(path, label + " [" + b.describe() + "]", shape, v);
}

}  // namespace hypolab
