use dess_service::WireMessage;
use proptest::option;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, any::<i32>().prop_map(f64::from), Just(0.0), Just(-0.0)]
}

fn message() -> impl Strategy<Value = WireMessage> {
    prop_oneof![
        (any::<u32>(), option::of("[a-z0-9 ]{0,12}"))
            .prop_map(|(version, device)| WireMessage::Hello { version, device }),
        (finite(), any::<u64>()).prop_map(|(angle, client_tick)| WireMessage::Input { angle, client_tick }),
        Just(WireMessage::StartTrial),
        Just(WireMessage::Abort),
        (
            any::<u32>(),
            "[a-z0-9-]{1,12}",
            ".{0,8}",
            any::<usize>(),
            any::<usize>(),
            finite()
        )
            .prop_map(
                |(version, session, label, trials, completed, screen_width)| WireMessage::Config {
                    version,
                    session,
                    label,
                    trials,
                    completed,
                    screen_width,
                }
            ),
        (any::<u64>(), option::of(finite()), option::of((finite(), finite()))).prop_map(|(tick, cursor, zone)| {
            WireMessage::Display {
                tick,
                cursor,
                zone: zone.map(|(a, b)| [a, b]),
            }
        }),
        (
            any::<u64>(),
            any::<bool>(),
            finite(),
            finite(),
            finite(),
            "[a-z=0-9.]{1,16}"
        )
            .prop_map(
                |(trial, hidden, distance, width, interval, condition)| WireMessage::TrialStart {
                    trial,
                    hidden,
                    distance,
                    width,
                    interval,
                    condition,
                }
            ),
        (any::<u64>(), option::of(finite()), any::<bool>(), any::<bool>()).prop_map(
            |(trial, reach_time, censored, invalid)| WireMessage::TrialEnd {
                trial,
                reach_time,
                censored,
                invalid,
            }
        ),
        any::<usize>().prop_map(|trials| WireMessage::ScheduleDone { trials }),
        ".{0,20}".prop_map(|message| WireMessage::Error { message }),
    ]
}

proptest! {
    #[test]
    fn every_message_round_trips(m in message()) {
        let text = m.encode();
        let back = WireMessage::decode(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.encode(), text);
    }
}
