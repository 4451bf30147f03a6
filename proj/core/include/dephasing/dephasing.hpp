#pragma once

#include "dephasing/entangle.hpp"
#include "dephasing/errors.hpp"
#include "dephasing/fastpath.hpp"
#include "dephasing/fock.hpp"
#include "dephasing/lindblad.hpp"
#include "dephasing/model.hpp"
#include "dephasing/operator_matrix.hpp"
#include "dephasing/oracle.hpp"
#include "dephasing/types.hpp"
