#pragma once

// Parameter container: a flat little-endian float64 blob plus a JSON manifest
// naming each tensor's shape and element offset.
//
//   <prefix>.json  {"format": "corrkit.params", "version": 1, "dtype": "float64-le",
//                   "attributes": {"heads": 2, ...},
//                   "tensors": [{"name": "query.weight", "shape": [8, 4],
//                                "offset": 0, "count": 32}, ...]}
//   <prefix>.bin   tensors concatenated in manifest order

#include <corrkit/featxform.hpp>
#include <corrkit/formats.hpp>

#include <map>
#include <string>
#include <vector>

namespace corrkit {

struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

class ParameterStore {
public:
    void add(std::string name, std::vector<int> shape, std::vector<double> values);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

    void set_attribute(const std::string& key, long long value) { attributes_[key] = value; }
    long long attribute(const std::string& key) const;

    std::string manifest() const;
    Bytes blob() const;
    static ParameterStore parse(std::string_view manifest, ByteView blob);

    void save(const std::string& prefix) const;
    static ParameterStore load(const std::string& prefix);

private:
    std::vector<Tensor> tensors_;
    std::map<std::string, long long> attributes_;
};

void add_linear(ParameterStore& store, const std::string& name, const Linear& layer);
Linear get_linear(const ParameterStore& store, const std::string& name);

ParameterStore to_parameters(const UpsampleAttention& attn);
UpsampleAttention upsample_attention_from(const ParameterStore& store);

ParameterStore to_parameters(const PatchEmbedSpec& spec);
PatchEmbedSpec patch_embed_from(const ParameterStore& store);

} // namespace corrkit
