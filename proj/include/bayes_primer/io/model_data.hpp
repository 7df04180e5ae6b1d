#ifndef BAYES_PRIMER_IO_MODEL_DATA_HPP_
#define BAYES_PRIMER_IO_MODEL_DATA_HPP_

#include <json.hpp>
#include <string>

#include "bayes_primer/errors.hpp"
#include "bayes_primer/io/csv.hpp"
#include "bayes_primer/model/graph.hpp"

// Model data ingestion: a JSON object of scalars and numeric arrays, or
// a CSV whose columns become arrays.

namespace bayes_primer::io {

inline model::DataMap model_data_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw data_error(std::string("model data: ") + e.what());
  }
  if (!j.is_object()) {
    throw data_error("model data: the JSON root must be an object");
  }
  model::DataMap data;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number()) {
      data[key] = model::data_scalar(value.get<double>());
    } else if (value.is_array()) {
      std::vector<double> xs;
      for (const auto& v : value) {
        if (!v.is_number()) {
          throw data_error("model data: array '" + key + "' must be numeric");
        }
        xs.push_back(v.get<double>());
      }
      data[key] = model::data_array(std::move(xs));
    } else {
      throw data_error("model data: '" + key +
                       "' must be a number or numeric array");
    }
  }
  return data;
}

inline model::DataMap model_data_from_csv(const std::string& text) {
  const CsvTable csv = parse_csv(text);
  model::DataMap data;
  for (const auto& name : csv.header) {
    data[name] = model::data_array(csv.numeric_column(name));
  }
  return data;
}

inline model::DataMap load_model_data(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return model_data_from_json(text);
  }
  return model_data_from_csv(text);
}

}  // namespace bayes_primer::io

#endif  // BAYES_PRIMER_IO_MODEL_DATA_HPP_
