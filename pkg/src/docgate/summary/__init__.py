"""The consortium-wide summary service: browse, search, article requests,
alert subscriptions, administration, and statistics export."""
