pub mod exactalg;
pub mod linkform;
pub mod intertwine;
pub mod linalg;
pub mod finheis;
pub mod spectral;
pub mod fock;
pub mod delignedata;
pub mod induced;
pub mod selftest;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/counting.md")]
    pub mod counting {}
    #[doc = include_str!("../../../book/src/finheis.md")]
    pub mod finheis {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    pub mod spectral {}
    #[doc = include_str!("../../../book/src/fock.md")]
    pub mod fock {}
    #[doc = include_str!("../../../book/src/induced.md")]
    pub mod induced {}
    #[doc = include_str!("../../../book/src/intertwine.md")]
    pub mod intertwine {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
