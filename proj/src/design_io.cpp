#include "ncsched/design_io.hpp"

#include <fstream>
#include <sstream>

#include "yaml_util.hpp"

namespace ncsched {

void write_design(std::ostream& os, const PriorityDesign& design) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << kDesignFormat;
  out << YAML::Key << "version" << YAML::Value << kDesignVersion;
  out << YAML::Key << "loops" << YAML::Value << design.loop_count;
  out << YAML::Key << "capacity" << YAML::Value << design.capacity;
  out << YAML::Key << "structure" << YAML::Value << to_string(design.structure);
  out << YAML::Key << "alpha" << YAML::Value << design.alpha;
  out << YAML::Key << "rho" << YAML::Value << design.rho;
  out << YAML::Key << "eps" << YAML::Value << design.eps;
  out << YAML::Key << "m" << YAML::Value;
  yaml::emit(out, design.m);
  out << YAML::Key << "p" << YAML::Value;
  yaml::emit(out, design.p);
  out << YAML::Key << "certificates" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : design.certificates) {
    out << YAML::BeginMap;
    out << YAML::Key << "P1" << YAML::Value;
    yaml::emit(out, c.closed);
    out << YAML::Key << "P0" << YAML::Value;
    yaml::emit(out, c.open);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  os << out.c_str() << '\n';
}

std::string design_to_string(const PriorityDesign& design) {
  std::ostringstream os;
  write_design(os, design);
  return os.str();
}

PriorityDesign read_design(std::istream& in) {
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("design: ") + e.what());
  }
  const std::string where = "design";
  yaml::require_keys(root, where,
                     {"format", "version", "loops", "capacity", "structure", "alpha", "rho", "eps", "m",
                      "p", "certificates"});
  if (yaml::as<std::string>(yaml::required(root, where, "format"), where) != kDesignFormat) {
    throw InvalidArgument("design: not an " + std::string(kDesignFormat) + " document");
  }
  const int version = yaml::as<int>(yaml::required(root, where, "version"), where);
  if (version != kDesignVersion) {
    throw InvalidArgument("design: unsupported version " + std::to_string(version));
  }
  PriorityDesign d;
  d.loop_count = yaml::as<int>(yaml::required(root, where, "loops"), where);
  d.capacity = yaml::as<int>(yaml::required(root, where, "capacity"), where);
  d.structure = structure_from_string(yaml::as<std::string>(yaml::required(root, where, "structure"), where));
  d.alpha = yaml::as<double>(yaml::required(root, where, "alpha"), where);
  d.rho = yaml::as<double>(yaml::required(root, where, "rho"), where);
  d.eps = yaml::as<double>(yaml::required(root, where, "eps"), where);
  d.m = yaml::vector(yaml::required(root, where, "m"), "design.m");
  d.p = yaml::vector(yaml::required(root, where, "p"), "design.p");
  const YAML::Node certs = yaml::required(root, where, "certificates");
  if (!certs.IsSequence()) throw InvalidArgument("design.certificates: expected a list");
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const std::string w = "design.certificates[" + std::to_string(i) + "]";
    yaml::require_keys(certs[i], w, {"P1", "P0"});
    LoopCertificate c{yaml::matrix(yaml::required(certs[i], w, "P1"), w + ".P1"),
                      yaml::matrix(yaml::required(certs[i], w, "P0"), w + ".P0")};
    if (c.closed.rows() != c.closed.cols() || c.open.rows() != c.open.cols() ||
        c.closed.rows() != c.open.rows()) {
      throw InvalidArgument(w + ": P1 and P0 must be square of equal size");
    }
    d.certificates.push_back(std::move(c));
  }
  if (d.loop_count < 2 || d.capacity < 1 || d.capacity >= d.loop_count ||
      static_cast<int>(d.certificates.size()) != d.loop_count || d.m.size() != d.loop_count ||
      d.p.size() != d.loop_count) {
    throw InvalidArgument("design: inconsistent loop count, capacity, or per-loop entries");
  }
  return d;
}

PriorityDesign design_from_string(const std::string& text) {
  std::istringstream in(text);
  return read_design(in);
}

void save_design(const std::string& path, const PriorityDesign& design) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  write_design(out, design);
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

PriorityDesign load_design(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  return read_design(in);
}

}  // namespace ncsched
