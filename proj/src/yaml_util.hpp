#pragma once

#include <initializer_list>
#include <string>

#include <yaml-cpp/yaml.h>

#include "ncsched/errors.hpp"
#include "ncsched/numerics.hpp"

namespace ncsched::yaml {

inline void require_keys(const YAML::Node& node, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw InvalidArgument(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

inline YAML::Node required(const YAML::Node& node, const std::string& where, const char* key) {
  const YAML::Node v = node[key];
  if (!v) throw InvalidArgument(where + ": missing key '" + key + "'");
  return v;
}

template <typename T>
T as(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidArgument(where + ": value has the wrong type");
  }
}

inline MatrixXd matrix(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) {
    throw InvalidArgument(where + ": expected a non-empty list of rows");
  }
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  MatrixXd out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const YAML::Node row = node[r];
    if (!row.IsSequence()) throw InvalidArgument(where + ": each row must be a list");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      if (cols == 0) throw InvalidArgument(where + ": empty row");
      out.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument(where + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = as<double>(row[c], where);
  }
  return out;
}

inline VectorXd vector(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) throw InvalidArgument(where + ": expected a non-empty list");
  VectorXd out(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) out(i) = as<double>(node[i], where);
  return out;
}

inline void emit(YAML::Emitter& out, const MatrixXd& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << m(r, c);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

inline void emit(YAML::Emitter& out, const VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

}  // namespace ncsched::yaml
