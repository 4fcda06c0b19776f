#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "halos/canonical.hpp"
#include "halos/harmonic.hpp"
#include "halos/indicatrix.hpp"
#include "halos/runge.hpp"

namespace halos {

// Every writer is deterministic: one fixed float format, stable field order,
// no timestamps. Two runs over the same data produce identical bytes.

// Shortest exact decimal with 17 significant digits.
std::string format_double(double x);

// Surface interchange. Fields:
//   vertices        vertex count
//   triangles       [[a, b, c], ...] counterclockwise
//   edge_lengths    canonical lexicographic (low, high) edge order
//   boundary_loops  [[v, ...], ...] surface on the left
//   node_classes    [[v, ...], ...]
//   planar_coords   [[x, y], ...] or null
//   planar_periods  [[p1x, p1y], [p2x, p2y]], zeros when aperiodic
void write_surface_json(std::ostream& os, const DiscreteSurface& s);
void write_surface_json(const std::string& path, const DiscreteSurface& s);
DiscreteSurface read_surface_json(std::istream& is);
DiscreteSurface read_surface_json(const std::string& path);

// Charges as [{"vertex": id, "q": [re, im]}, ...].
void write_charges_json(std::ostream& os, const ChargeSet& c);
ChargeSet read_charges_json(std::istream& is);

// vertex,q_re,q_im
void write_charges_csv(std::ostream& os, const ChargeSet& c);

void write_error_report_json(std::ostream& os, const ErrorReport& r);

// vertex,declared_re,declared_im,measured_re,measured_im
void write_residues_csv(std::ostream& os, const std::vector<ResidueRow>& rows);

// vertex,x,y then one re/im column pair per named field. Needs planar
// coordinates. The reader returns the named columns in file order and
// checks the vertex count.
void write_fields_csv(std::ostream& os, const DiscreteSurface& s,
                      const std::vector<std::pair<std::string, Cochain0>>& fields);
std::vector<std::pair<std::string, Cochain0>> read_fields_csv(std::istream& is, Index n_vertices);

// xi0_re,xi0_im,xi1,g_re,g_im,winding,valid
void write_indicatrix_csv(std::ostream& os, const IndicatrixGrid& g);

// f1_re,f1_im,f2_re,f2_im, one contour sample per row, header optional.
BoundaryFunctions read_boundary_functions_csv(std::istream& is);

void write_predicates_json(std::ostream& os, const PredicateReport& rep);

}  // namespace halos
