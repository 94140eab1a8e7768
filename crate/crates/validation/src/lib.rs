//! Holds the `acceptance` test target, which runs every check of
//! `cavity_eit::validate` and prints one PASS/FAIL line per check.
