pub mod cone_suite;
