import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

MAX_LEN = 100
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class CNNRNN(keras.Model):
    """Convolutional and recurrent branches over a shared embedding, joined before the classifier."""

    def __init__(self):
        super().__init__()
        self.embedding = layers.Embedding(10000, 128)
        self.conv = layers.Conv1D(64, 5, activation="relu")
        self.pool = layers.MaxPooling1D(2)
        self.conv_dropout = layers.Dropout(0.2)
        self.conv_lstm = layers.LSTM(64)
        self.rnn = layers.Bidirectional(layers.LSTM(64))
        self.rnn_dropout = layers.Dropout(0.2)
        self.fc1 = layers.Dense(64, activation="relu")
        self.fc_dropout = layers.Dropout(0.5)
        self.fc2 = layers.Dense(32, activation="relu")
        self.out = layers.Dense(1, activation="sigmoid")

    def call(self, inputs):
        x = self.embedding(inputs)
        c = self.conv(x)
        c = self.pool(c)
        c = self.conv_dropout(c)
        c = self.conv_lstm(c)
        r = self.rnn(x)
        r = self.rnn_dropout(r)
        merged = layers.concatenate([c, r])
        h = self.fc1(merged)
        h = self.fc_dropout(h)
        h = self.fc2(h)
        return self.out(h)


model = CNNRNN()
model.build((None, MAX_LEN))
model.compile(optimizer="adam", loss="binary_crossentropy", metrics=["accuracy"])
model.fit(x_train, y_train, batch_size=64, epochs=10)
