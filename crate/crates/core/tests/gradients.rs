use mclnn::network::{Architecture, Model, Pooling, Transfer};
use mclnn::numerics::{check_gradient, Mat, Prng};
use mclnn::training::cross_entropy;

fn full_model_error(arch: Architecture, seed: u64) -> f64 {
    let mut model = Model::new(arch, seed).unwrap();
    let mut rng = Prng::new(seed ^ 0xabc);
    let mut params = model.flatten_params();
    // nonzero biases, and no ties for max pooling
    for p in &mut params {
        *p += rng.uniform(-0.05, 0.05);
    }
    model.set_params(&params).unwrap();
    let l = model.feature_len();
    let x = Mat::from_vec(model.segment_len(), l, (0..model.segment_len() * l).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
    let label = model.class_count() - 1;

    let ones: Vec<Vec<f64>> = model.dropout_sites().iter().map(|&n| vec![1.0; n]).collect();
    let trace = model.forward_trace(&x, &ones).unwrap();
    let mut d = trace.probs.clone();
    d[label] -= 1.0;
    let analytic = model.backward(&x, &trace, &d).unwrap().flatten();

    let mut probe = model.clone();
    check_gradient(
        |p| {
            probe.set_params(p).unwrap();
            cross_entropy(&probe.forward(&x).unwrap(), label).unwrap()
        },
        &params,
        &analytic,
        1e-5,
    )
    .unwrap()
}

fn base() -> Architecture {
    Architecture {
        feature_len: 7,
        order: 1,
        layers: 2,
        surviving: 3,
        width: 7,
        mask: Some((3, -1)),
        transfer: Transfer::Sigmoid,
        pooling: Pooling::Mean,
        dense: vec![5, 4],
        dense_transfer: Transfer::Tanh,
        class_count: 3,
    }
}

#[test]
fn stacked_masked_layers() {
    assert!(full_model_error(base(), 1) < 1e-4);
}

#[test]
fn unmasked_tanh_with_max_pooling() {
    let arch = Architecture {
        mask: None,
        transfer: Transfer::Tanh,
        pooling: Pooling::Max,
        ..base()
    };
    assert!(full_model_error(arch, 2) < 1e-4);
}

#[test]
fn no_hidden_dense_layers() {
    let arch = Architecture {
        dense: vec![],
        layers: 1,
        ..base()
    };
    assert!(full_model_error(arch, 3) < 1e-4);
}
