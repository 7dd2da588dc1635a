#ifndef FWRNN_PARAMS_HPP_
#define FWRNN_PARAMS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "fwrnn/matrix.hpp"

namespace fwrnn {

/// Ordered collection of named weight matrices. The flat view concatenates
/// all matrices row-major in insertion order; that ordering is the canonical
/// one used by norms, LMOs and checkpoints.
class ParamSet {
public:
    void add(std::string name, Matrix m);
    bool has(const std::string& name) const;
    Matrix& get(const std::string& name);
    const Matrix& get(const std::string& name) const;

    std::size_t count() const { return entries_.size(); }
    std::size_t flat_size() const;
    const std::vector<std::pair<std::string, Matrix>>& entries() const {
        return entries_;
    }
    std::vector<std::pair<std::string, Matrix>>& entries() { return entries_; }

    /// Concatenated row-major flat view, insertion order.
    Vector flatten() const;
    /// Inverse of flatten; shapes and names are kept, values replaced.
    void set_from_flat(const Vector& flat);

    /// params += alpha * flat (flat in canonical ordering).
    void add_flat(double alpha, const Vector& flat);

    /// Same names and shapes, all entries zero.
    ParamSet zeros_like() const;

    bool all_finite() const;

    /// Little-endian binary checkpoint (documented in README).
    void save(const std::string& path) const;
    static ParamSet load(const std::string& path);
    /// Lossless text dump for debugging (round-trips every bit via %.17g).
    void dump_text(const std::string& path) const;

private:
    std::vector<std::pair<std::string, Matrix>> entries_;
};

}  // namespace fwrnn

#endif  // FWRNN_PARAMS_HPP_
